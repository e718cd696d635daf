#pragma once

#include <optional>
#include <string>
#include <vector>

#include "snl/model.hpp"

namespace snl {

/// On-disk problem instance. `sensors_true` is present when the file came
/// from a generator that knows the ground truth.
struct ProblemFile {
  SnlProblem problem;
  std::optional<std::vector<Eigen::VectorXd>> sensors_true;

  /// Framework view; throws if sensors_true is absent.
  Framework framework() const;
};

/// Serializes to the documented schema:
///   { "dim", "n_sensors", "anchors", "sensors_true",
///     "edges_ss": [[i, j, dist]...], "edges_as": [[anchor, sensor, dist]...] }
/// Doubles are written with shortest round-trip precision, so load(save(p))
/// reproduces every coordinate and distance bit-exactly.
std::string problem_to_json(const SnlProblem& p,
                            const std::optional<std::vector<Eigen::VectorXd>>&
                                sensors_true = std::nullopt);
ProblemFile problem_from_json(const std::string& text);

void save_problem(const std::string& path, const SnlProblem& p,
                  const std::optional<std::vector<Eigen::VectorXd>>&
                      sensors_true = std::nullopt);
ProblemFile load_problem(const std::string& path);

/// Sensor configuration files: a JSON array of n coordinate rows.
std::string config_to_json(const std::vector<Eigen::VectorXd>& rows);
std::vector<Eigen::VectorXd> config_from_json(const std::string& text);
std::vector<Eigen::VectorXd> load_config(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace snl
