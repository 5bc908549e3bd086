#include "uikf/config.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "uikf/errors.hpp"

namespace uikf {

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key,
                    const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(path + key, "missing required field");
  }
  return obj.at(key);
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) {
    throw ConfigError(field, "expected a number");
  }
  return v.get<double>();
}

Matrix matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) {
    throw ConfigError(field, "expected a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(v.size());
  if (!v.front().is_array()) {
    throw ConfigError(field, "expected an array of arrays");
  }
  const auto cols = static_cast<Eigen::Index>(v.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(fmt::format("{}[{}]", field, r),
                        fmt::format("expected {} columns", cols));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = number(row[static_cast<std::size_t>(c)],
                       fmt::format("{}[{}][{}]", field, r, c));
    }
  }
  return m;
}

Vector vector(const json& v, const std::string& field) {
  if (!v.is_array()) {
    throw ConfigError(field, "expected an array");
  }
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = number(v[i], fmt::format("{}[{}]", field, i));
  }
  return out;
}

std::vector<double> doubles(const json& v, const std::string& field) {
  const Vector x = vector(v, field);
  return {x.data(), x.data() + x.size()};
}

SignalSpec signal(const json& v, const std::string& field) {
  const std::string kind = require(v, "kind", field + ".").get<std::string>();
  auto num = [&](const char* key) {
    return number(require(v, key, field + "."), field + "." + key);
  };
  if (kind == "zero") {
    return SignalSpec::zero();
  }
  if (kind == "step") {
    return SignalSpec::step(num("t_on"), num("t_off"), num("amplitude"));
  }
  if (kind == "windowed_sine") {
    return SignalSpec::windowedSine(num("t_on"), num("t_off"), num("amplitude"),
                                    num("f0"));
  }
  if (kind == "samples" || kind == "custom-samples") {
    try {
      return SignalSpec::samples(
          doubles(require(v, "times", field + "."), field + ".times"),
          doubles(require(v, "values", field + "."), field + ".values"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field, e.what());
    }
  }
  throw ConfigError(field + ".kind", fmt::format("unknown signal kind '{}'", kind));
}

SystemModel parseModel(const json& doc, double dt) {
  const json& m = require(doc, "model", "");
  const Matrix A = matrix(require(m, "A", "model."), "model.A");
  const Matrix C = matrix(require(m, "C", "model."), "model.C");
  const Matrix R = matrix(require(m, "R", "model."), "model.R");
  const auto nx = A.rows();
  const Matrix E = matrix(require(m, "E", "model."), "model.E");
  const Matrix B = m.contains("B") ? matrix(m.at("B"), "model.B")
                                   : Matrix::Zero(nx, 1);
  const Matrix G = m.contains("G") ? matrix(m.at("G"), "model.G")
                                   : Matrix::Identity(nx, nx);
  const Matrix Q = m.contains("Q") ? matrix(m.at("Q"), "model.Q")
                                   : Matrix::Zero(G.cols(), G.cols());

  auto shape = [](const Matrix& x, Eigen::Index r, Eigen::Index c,
                  const char* field) {
    if (x.rows() != r || x.cols() != c) {
      throw ConfigError(field, fmt::format("expected {}x{}, got {}x{}", r, c,
                                           x.rows(), x.cols()));
    }
  };
  shape(A, nx, nx, "model.A");
  shape(B, nx, B.cols(), "model.B");
  shape(E, nx, E.cols(), "model.E");
  shape(G, nx, G.cols(), "model.G");
  shape(C, C.rows(), nx, "model.C");
  shape(Q, G.cols(), G.cols(), "model.Q");
  shape(R, C.rows(), C.rows(), "model.R");
  if (E.cols() > C.rows()) {
    throw ConfigError("model.E",
                      fmt::format("rank condition violated: n_d = {} exceeds "
                                  "n_y = {}",
                                  E.cols(), C.rows()));
  }
  if (!checkRankCondition(C, E)) {
    throw ConfigError("model.E",
                      "rank condition violated: rank(C E) != rank(E) = n_d");
  }
  try {
    return SystemModel::timeInvariant(A, B, E, G, C, Q, R, dt);
  } catch (const std::exception& e) {
    throw ConfigError("model", e.what());
  }
}

}  // namespace

ScenarioConfig parseScenarioConfig(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("<document>", "expected an object");
  }
  const json& schema = require(doc, "schema", "");
  if (!schema.is_number_integer() || schema.get<int>() != 1) {
    throw ConfigError("schema", "unsupported schema version (expected 1)");
  }

  const double dt = doc.contains("dt") ? number(doc.at("dt"), "dt") : 0.01;
  if (!(dt > 0.0)) {
    throw ConfigError("dt", "must be > 0");
  }

  try {
    ScenarioConfig config(parseModel(doc, dt));
    const auto& dims = config.model.dims();
    config.name = doc.value("name", std::string("scenario"));
    if (doc.contains("duration")) {
      config.duration = number(doc.at("duration"), "duration");
    }

    if (doc.contains("signals")) {
      const json& sigs = doc.at("signals");
      if (!sigs.is_array()) {
        throw ConfigError("signals", "expected an array");
      }
      for (std::size_t i = 0; i < sigs.size(); ++i) {
        config.signals.push_back(signal(sigs[i], fmt::format("signals[{}]", i)));
      }
    } else {
      config.signals.assign(static_cast<std::size_t>(dims.nd), SignalSpec::zero());
    }

    config.x0_true = vector(require(doc, "x0_true", ""), "x0_true");
    config.x0_hat = vector(require(doc, "x0_hat", ""), "x0_hat");
    if (doc.contains("u")) {
      config.u = vector(doc.at("u"), "u");
    }
    if (doc.contains("seeds")) {
      const json& seeds = doc.at("seeds");
      if (!seeds.is_array()) {
        throw ConfigError("seeds", "expected an array of non-negative integers");
      }
      config.seeds.clear();
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (!seeds[i].is_number_unsigned()) {
          throw ConfigError(fmt::format("seeds[{}]", i),
                            "expected a non-negative integer");
        }
        config.seeds.push_back(seeds[i].get<std::uint64_t>());
      }
    }
    if (doc.contains("estimators")) {
      const json& est = doc.at("estimators");
      if (!est.is_array()) {
        throw ConfigError("estimators", "expected an array of names");
      }
      config.estimators.clear();
      for (std::size_t i = 0; i < est.size(); ++i) {
        const std::string field = fmt::format("estimators[{}]", i);
        if (!est[i].is_string()) {
          throw ConfigError(field, "expected a string");
        }
        try {
          config.estimators.push_back(parseEstimator(est[i].get<std::string>()));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(field, e.what());
        }
      }
    }
    if (doc.contains("rmse_start")) {
      config.rmse_start = number(doc.at("rmse_start"), "rmse_start");
    }
    if (doc.contains("r4skf")) {
      const json& r = doc.at("r4skf");
      if (r.contains("p0_scale")) {
        config.p0_scale = number(r.at("p0_scale"), "r4skf.p0_scale");
      }
    }
    if (doc.contains("a2kf")) {
      const json& a = doc.at("a2kf");
      if (a.contains("window")) {
        if (!a.at("window").is_number_unsigned()) {
          throw ConfigError("a2kf.window", "expected a positive integer");
        }
        config.a2kf.window = a.at("window").get<std::size_t>();
      }
      if (a.contains("qd_initial")) {
        config.a2kf.qd_initial = number(a.at("qd_initial"), "a2kf.qd_initial");
      }
      if (a.contains("qd_floor")) {
        config.a2kf.qd.floor = number(a.at("qd_floor"), "a2kf.qd_floor");
      }
      if (a.contains("rescale_dt")) {
        if (!a.at("rescale_dt").is_boolean()) {
          throw ConfigError("a2kf.rescale_dt", "expected a boolean");
        }
        config.a2kf.qd.rescale_by_dt = a.at("rescale_dt").get<bool>();
      }
      if (a.contains("negative_check")) {
        const std::string check = a.at("negative_check").get<std::string>();
        if (check == "estimate") {
          config.a2kf.qd.check = QdOptions::NegativeCheck::kEstimate;
        } else if (check == "innovation") {
          config.a2kf.qd.check = QdOptions::NegativeCheck::kInnovation;
        } else {
          throw ConfigError("a2kf.negative_check",
                            "expected \"estimate\" or \"innovation\"");
        }
      }
    }
    if (doc.contains("uio")) {
      const json& gain = require(doc.at("uio"), "gain", "uio.");
      if (gain.is_string()) {
        const std::string mode = gain.get<std::string>();
        if (mode == "pinv") {
          config.uio_gain.mode = UioGainSpec::Mode::kPinv;
        } else if (mode == "steady_state") {
          config.uio_gain.mode = UioGainSpec::Mode::kSteadyState;
        } else {
          throw ConfigError("uio.gain", "expected \"pinv\", \"steady_state\" "
                                        "or a matrix");
        }
      } else {
        config.uio_gain.mode = UioGainSpec::Mode::kMatrix;
        config.uio_gain.L = matrix(gain, "uio.gain");
      }
    }
    config.validate();
    return config;
  } catch (const json::exception& e) {
    throw ConfigError("<document>", e.what());
  }
}

ScenarioConfig loadScenarioConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("--config", fmt::format("cannot read {}", path.string()));
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parseScenarioConfig(text.str());
}

}  // namespace uikf
