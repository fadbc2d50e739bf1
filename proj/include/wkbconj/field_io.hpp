// Field/metric definition files: JSON with a chart, an expression-valued
// metric and velocity, named parameters, and an optional run section.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wkbconj/chart.hpp"
#include "wkbconj/field.hpp"
#include "wkbconj/metric.hpp"

namespace wkbconj {

struct FieldConfig {
  std::string name;
  Chart chart;
  Metric metric;
  VectorField velocity;
  std::map<std::string, double> params;
};

struct RunSection {
  std::vector<Vec3> points;
  int grid_level = 4;
  double horizon = 50.0;
  double rtol = 1e-9;
  double atol = 1e-12;
  std::string out_dir;
  bool first_only = false;
};

struct LoadedConfig {
  FieldConfig field;
  std::optional<RunSection> run;
};

// Throws ConfigError on malformed JSON or schema violations and ParseError
// (with position) on malformed expressions.
LoadedConfig parse_field_json(const std::string& text);
LoadedConfig load_field_file(const std::string& path);

// Built-in example configurations, as JSON texts accepted by the loader.
std::string builtin_annulus_json();  // twisted torus, f = sin x1, z in [1,2]
std::string builtin_killing_json();  // rigid rotation, |curl u| = 1
std::string builtin_shear_json();    // plane shear u = (x2, 0, 0)

}  // namespace wkbconj
