#include "wkbconj/field_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace wkbconj {

namespace {

using nlohmann::json;

Expression parse_entry(const std::string& text, const std::map<std::string, double>& params,
                       const std::string& where) {
  try {
    return Expression::parse(text, params);
  } catch (const ParseError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

LoadedConfig parse_field_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field file is not valid JSON: ") + e.what());
  }

  LoadedConfig cfg;
  try {
    cfg.field.name = j.value("name", std::string("field"));

    const json& chart = j.at("chart");
    const json& bounds = chart.at("bounds");
    if (!bounds.is_array() || bounds.size() != 3)
      throw ConfigError("chart.bounds must be three [lo, hi] pairs");
    for (int i = 0; i < 3; ++i) {
      cfg.field.chart.lo[i] = bounds[i].at(0).get<double>();
      cfg.field.chart.hi[i] = bounds[i].at(1).get<double>();
      if (!(cfg.field.chart.lo[i] < cfg.field.chart.hi[i]))
        throw ConfigError("chart.bounds must have lo < hi");
    }
    if (chart.contains("periodic")) {
      const json& p = chart.at("periodic");
      if (!p.is_array() || p.size() != 3) throw ConfigError("chart.periodic must have 3 entries");
      for (int i = 0; i < 3; ++i) cfg.field.chart.periodic[i] = p[i].get<bool>();
    }

    if (j.contains("params")) {
      for (const auto& [key, value] : j.at("params").items())
        cfg.field.params[key] = value.get<double>();
    }

    const json& metric = j.at("metric");
    if (!metric.is_array() || metric.size() != 3)
      throw ConfigError("metric must be a 3x3 matrix of expressions");
    ExprMatrix g;
    for (int i = 0; i < 3; ++i) {
      if (!metric[i].is_array() || metric[i].size() != 3)
        throw ConfigError("metric must be a 3x3 matrix of expressions");
      for (int k = 0; k < 3; ++k) {
        std::ostringstream where;
        where << "metric[" << i << "][" << k << "]";
        g[i][k] = parse_entry(metric[i][k].get<std::string>(), cfg.field.params, where.str());
      }
    }
    cfg.field.metric = Metric::from_expressions(g);

    const json& vel = j.at("velocity");
    if (!vel.is_array() || vel.size() != 3)
      throw ConfigError("velocity must be 3 expressions");
    ExprVec3 u;
    for (int i = 0; i < 3; ++i) {
      std::ostringstream where;
      where << "velocity[" << i << "]";
      u[i] = parse_entry(vel[i].get<std::string>(), cfg.field.params, where.str());
    }
    const bool steady = j.value("steady", true);
    if (steady) {
      for (int i = 0; i < 3; ++i)
        if (u[i].depends_on(3))
          throw ConfigError("velocity declared steady but depends on t");
    }
    cfg.field.velocity = VectorField::from_expressions(u, steady);

    if (j.contains("run")) {
      const json& r = j.at("run");
      RunSection run;
      if (r.contains("points")) {
        for (const auto& p : r.at("points")) {
          if (!p.is_array() || p.size() != 3) throw ConfigError("run.points entries need 3 coords");
          run.points.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
        }
      }
      run.grid_level = r.value("grid_level", run.grid_level);
      run.horizon = r.value("horizon", run.horizon);
      run.rtol = r.value("rtol", run.rtol);
      run.atol = r.value("atol", run.atol);
      run.out_dir = r.value("out", run.out_dir);
      run.first_only = r.value("first_only", run.first_only);
      if (!(run.horizon > 0.0)) throw ConfigError("run.horizon must be positive");
      if (!(run.rtol > 0.0) || !(run.atol > 0.0))
        throw ConfigError("run tolerances must be positive");
      cfg.run = run;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field file schema error: ") + e.what());
  }
  return cfg;
}

LoadedConfig load_field_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_field_json(buf.str());
}

std::string builtin_annulus_json() {
  return R"json({
  "name": "annulus",
  "chart": {
    "bounds": [[0.0, 6.283185307179586], [0.0, 6.283185307179586], [1.0, 2.0]],
    "periodic": [true, true, false]
  },
  "metric": [["x3", "0", "0"],
             ["0", "1", "sin(x1)"],
             ["0", "sin(x1)", "sin(x1)^2 + 1/x3"]],
  "velocity": ["1", "0", "0"],
  "steady": true,
  "run": {"points": [[0.9, 0.0, 1.4]], "horizon": 40.0, "grid_level": 3}
})json";
}

std::string builtin_killing_json() {
  return R"json({
  "name": "killing-rotation",
  "chart": {
    "bounds": [[-30.0, 30.0], [-30.0, 30.0], [-30.0, 30.0]],
    "periodic": [false, false, false]
  },
  "metric": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
  "velocity": ["-0.5*x2", "0.5*x1", "0"],
  "steady": true,
  "run": {"points": [[1.1, -0.4, 0.25]], "horizon": 40.0, "grid_level": 4}
})json";
}

std::string builtin_shear_json() {
  return R"json({
  "name": "plane-shear",
  "chart": {
    "bounds": [[-25.0, 25.0], [-25.0, 25.0], [-25.0, 25.0]],
    "periodic": [false, false, false]
  },
  "metric": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
  "velocity": ["x2", "0", "0"],
  "steady": true,
  "run": {"points": [[0.0, 0.3, 0.1]], "horizon": 20.0, "grid_level": 3}
})json";
}

}  // namespace wkbconj
