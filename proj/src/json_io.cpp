#include "snl/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace snl {

using ordered_json = nlohmann::ordered_json;

Framework ProblemFile::framework() const {
  if (!sensors_true)
    throw std::runtime_error("problem file has no true sensor positions");
  Framework fw;
  fw.topology = problem.topology;
  fw.dim = problem.dim;
  fw.anchors = problem.anchors;
  fw.sensors = *sensors_true;
  fw.validate();
  return fw;
}

namespace {

ordered_json vec_to_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (int k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

Eigen::VectorXd vec_from_json(const ordered_json& a, int dim, const char* what) {
  if (!a.is_array() || static_cast<int>(a.size()) != dim)
    throw std::runtime_error(std::string("bad ") + what + " entry");
  Eigen::VectorXd v(dim);
  for (int k = 0; k < dim; ++k) v[k] = a[k].get<double>();
  return v;
}

}  // namespace

std::string problem_to_json(
    const SnlProblem& p,
    const std::optional<std::vector<Eigen::VectorXd>>& sensors_true) {
  p.validate();
  if (sensors_true &&
      static_cast<int>(sensors_true->size()) != p.topology.n_sensors())
    throw std::invalid_argument("sensors_true size mismatch");

  ordered_json j;
  j["dim"] = p.dim;
  j["n_sensors"] = p.topology.n_sensors();
  ordered_json anchors = ordered_json::array();
  for (const auto& a : p.anchors) anchors.push_back(vec_to_json(a));
  j["anchors"] = anchors;
  if (sensors_true) {
    ordered_json st = ordered_json::array();
    for (const auto& s : *sensors_true) st.push_back(vec_to_json(s));
    j["sensors_true"] = st;
  } else {
    j["sensors_true"] = nullptr;
  }
  ordered_json ess = ordered_json::array();
  for (size_t k = 0; k < p.topology.edges_ss().size(); ++k) {
    const auto& e = p.topology.edges_ss()[k];
    ess.push_back(ordered_json::array({e.i, e.j, p.dist_ss[k]}));
  }
  j["edges_ss"] = ess;
  ordered_json eas = ordered_json::array();
  for (size_t k = 0; k < p.topology.edges_as().size(); ++k) {
    const auto& e = p.topology.edges_as()[k];
    eas.push_back(ordered_json::array({e.anchor, e.sensor, p.dist_as[k]}));
  }
  j["edges_as"] = eas;
  return j.dump(2) + "\n";
}

ProblemFile problem_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  ProblemFile pf;
  const int dim = j.at("dim").get<int>();
  const int n_anchors = static_cast<int>(j.at("anchors").size());

  int n_sensors = -1;
  if (j.contains("n_sensors") && !j["n_sensors"].is_null())
    n_sensors = j["n_sensors"].get<int>();
  std::optional<std::vector<Eigen::VectorXd>> sensors_true;
  if (!j.at("sensors_true").is_null()) {
    std::vector<Eigen::VectorXd> st;
    for (const auto& row : j["sensors_true"])
      st.push_back(vec_from_json(row, dim, "sensors_true"));
    sensors_true = std::move(st);
    if (n_sensors < 0) n_sensors = static_cast<int>(sensors_true->size());
  }
  if (n_sensors < 0) {
    // Last resort: infer the count from edge indices.
    int max_idx = -1;
    for (const auto& e : j.at("edges_ss"))
      max_idx = std::max({max_idx, e[0].get<int>(), e[1].get<int>()});
    for (const auto& e : j.at("edges_as"))
      max_idx = std::max(max_idx, e[1].get<int>());
    n_sensors = max_idx + 1;
  }

  SnlProblem& p = pf.problem;
  p.dim = dim;
  for (const auto& row : j["anchors"])
    p.anchors.push_back(vec_from_json(row, dim, "anchors"));
  p.topology = Topology(n_sensors, n_anchors);
  for (const auto& e : j.at("edges_ss")) {
    p.topology.add_ss(e[0].get<int>(), e[1].get<int>());
    p.dist_ss.push_back(e[2].get<double>());
  }
  for (const auto& e : j.at("edges_as")) {
    p.topology.add_as(e[0].get<int>(), e[1].get<int>());
    p.dist_as.push_back(e[2].get<double>());
  }
  p.validate();
  pf.sensors_true = std::move(sensors_true);
  return pf;
}

void save_problem(const std::string& path, const SnlProblem& p,
                  const std::optional<std::vector<Eigen::VectorXd>>& st) {
  write_file(path, problem_to_json(p, st));
}

ProblemFile load_problem(const std::string& path) {
  return problem_from_json(read_file(path));
}

std::string config_to_json(const std::vector<Eigen::VectorXd>& rows) {
  ordered_json a = ordered_json::array();
  for (const auto& r : rows) a.push_back(vec_to_json(r));
  return a.dump(2) + "\n";
}

std::vector<Eigen::VectorXd> config_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  if (!j.is_array()) throw std::runtime_error("config: expected a JSON array");
  std::vector<Eigen::VectorXd> rows;
  for (const auto& row : j) {
    if (!row.is_array() || row.empty())
      throw std::runtime_error("config: expected coordinate rows");
    rows.push_back(vec_from_json(row, static_cast<int>(row.size()), "config"));
  }
  return rows;
}

std::vector<Eigen::VectorXd> load_config(const std::string& path) {
  return config_from_json(read_file(path));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace snl
