#pragma once

#include <filesystem>
#include <string>

#include "uikf/sim.hpp"

namespace uikf {

/**
 * Scenario document, schema 1 (JSON):
 *
 *   {
 *     "schema": 1,
 *     "name": "demo",                      // optional
 *     "dt": 0.01, "duration": 10.0,
 *     "model": {"A": [[...]], "B": [[...]], "E": [[...]], "G": [[...]],
 *               "C": [[...]], "Q": [[...]], "R": [[...]]},
 *     "signals": [{"kind": "step", "t_on": 3, "t_off": 7, "amplitude": 0.5},
 *                 {"kind": "windowed_sine", "t_on": 2, "t_off": 6,
 *                  "amplitude": 0.4, "f0": 0.5},
 *                 {"kind": "samples", "times": [...], "values": [...]},
 *                 {"kind": "zero"}],
 *     "x0_true": [...], "x0_hat": [...], "u": [...],   // u optional
 *     "seeds": [1, 2, 3],
 *     "estimators": ["r4skf", "a2kf", "onestep", "uio"],
 *     "rmse_start": 1.0,
 *     "r4skf": {"p0_scale": 10},
 *     "a2kf": {"window": 10, "qd_initial": 1e-6, "qd_floor": 1e-12,
 *              "rescale_dt": false, "negative_check": "estimate"},
 *     "uio": {"gain": "pinv" | "steady_state" | [[...]]}
 *   }
 *
 * Matrices are row-major arrays of arrays. Everything except "schema",
 * "model", "x0_true" and "x0_hat" has a default.
 */
ScenarioConfig parseScenarioConfig(const std::string& text);
ScenarioConfig loadScenarioConfig(const std::filesystem::path& path);

}  // namespace uikf
