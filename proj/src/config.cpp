#include "membrane/config.hpp"

#include <fstream>
#include <stdexcept>

namespace membrane {

namespace {

Eigen::VectorXd vector_from(const nlohmann::json& j, const char* field) {
  if (!j.is_array())
    throw std::invalid_argument(std::string("config: ") + field +
                                " must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

ModelParams model_from(const nlohmann::json& j) {
  ModelParams p;
  p.d = j.at("d").get<int>();
  if (p.d < 2) throw std::invalid_argument("config: model.d must be >= 2");
  const auto& bj = j.at("B");
  if (!bj.is_array() || bj.size() != static_cast<std::size_t>(p.d * p.d))
    throw std::invalid_argument("config: model.B must hold d*d entries, row-major");
  p.B.resize(p.d, p.d);
  for (int i = 0; i < p.d; ++i)
    for (int k = 0; k < p.d; ++k) p.B(i, k) = bj[i * p.d + k].get<double>();
  p.nu = vector_from(j.at("nu"), "model.nu");
  p.alpha = vector_from(j.at("alpha"), "model.alpha");
  p.q = j.at("q").get<double>();
  p.validate();
  return p;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j) {
  RunConfig c;
  c.run = j.at("run").get<std::string>();
  if (c.run != "density" && c.run != "sample" && c.run != "path" &&
      c.run != "verify")
    throw std::invalid_argument("config: run must be density|sample|path|verify");

  if (j.contains("model")) {
    c.model = model_from(j.at("model"));
    c.has_model = true;
  } else if (c.run != "verify") {
    throw std::invalid_argument("config: model is required for run=" + c.run);
  }

  if (j.contains("t")) {
    const auto& tj = j.at("t");
    if (tj.is_array())
      for (const auto& e : tj) c.times.push_back(e.get<double>());
    else
      c.times.push_back(tj.get<double>());
    if (c.times.empty() || !(c.times.front() > 0.0))
      throw std::invalid_argument("config: t must be positive");
    for (std::size_t i = 1; i < c.times.size(); ++i)
      if (!(c.times[i] > c.times[i - 1]))
        throw std::invalid_argument("config: time grid must be strictly increasing");
  }

  if (j.contains("x")) {
    c.x = vector_from(j.at("x"), "x");
    if (c.has_model && c.x.size() != c.model.d)
      throw std::invalid_argument("config: x must have dimension d");
  } else if (c.has_model) {
    c.x = Eigen::VectorXd::Zero(c.model.d);
  }

  if (j.contains("n")) {
    c.n = j.at("n").get<std::int64_t>();
    if (c.n < 1) throw std::invalid_argument("config: n must be >= 1");
  }
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("shift")) c.shift = j.at("shift").get<bool>();
  if (j.contains("suite")) c.suite = j.at("suite").get<std::string>();

  if (j.contains("quad")) {
    const auto& qj = j.at("quad");
    if (qj.contains("rel_tol")) c.quad.rel_tol = qj.at("rel_tol").get<double>();
    if (qj.contains("abs_tol")) c.quad.abs_tol = qj.at("abs_tol").get<double>();
    if (qj.contains("max_panels"))
      c.quad.max_panels = qj.at("max_panels").get<int>();
    if (qj.contains("tail_sigmas"))
      c.quad.tail_sigmas = qj.at("tail_sigmas").get<double>();
    c.quad.validate();
  }

  if (j.contains("grid")) {
    const auto& gj = j.at("grid");
    c.grid.min = vector_from(gj.at("min"), "grid.min");
    c.grid.max = vector_from(gj.at("max"), "grid.max");
    for (const auto& e : gj.at("count")) c.grid.count.push_back(e.get<int>());
    if (c.grid.min.size() != c.grid.max.size() ||
        static_cast<std::size_t>(c.grid.min.size()) != c.grid.count.size())
      throw std::invalid_argument("config: grid min/max/count sizes differ");
    for (int cnt : c.grid.count)
      if (cnt < 1)
        throw std::invalid_argument("config: grid count must be >= 1 on every axis");
    c.has_grid = true;
  }

  if (j.contains("output")) {
    const auto& oj = j.at("output");
    if (oj.contains("path")) c.output.path = oj.at("path").get<std::string>();
    if (oj.contains("format"))
      c.output.format = oj.at("format").get<std::string>();
    if (c.output.format != "csv" && c.output.format != "jsonl")
      throw std::invalid_argument("config: output.format must be csv or jsonl");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: invalid JSON in " + path + ": " +
                                e.what());
  }
  return parse_config(j);
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["run"] = c.run;
  if (c.has_model) {
    std::vector<double> b;
    for (int i = 0; i < c.model.d; ++i)
      for (int k = 0; k < c.model.d; ++k) b.push_back(c.model.B(i, k));
    j["model"] = {{"d", c.model.d},
                  {"B", b},
                  {"nu", std::vector<double>(c.model.nu.data(),
                                             c.model.nu.data() + c.model.d)},
                  {"alpha", std::vector<double>(
                                c.model.alpha.data(),
                                c.model.alpha.data() + c.model.d)},
                  {"q", c.model.q}};
  }
  if (!c.times.empty()) {
    if (c.times.size() == 1)
      j["t"] = c.times.front();
    else
      j["t"] = c.times;
  }
  if (c.x.size() > 0)
    j["x"] = std::vector<double>(c.x.data(), c.x.data() + c.x.size());
  j["n"] = c.n;
  j["seed"] = c.seed;
  j["shift"] = c.shift;
  j["suite"] = c.suite;
  j["quad"] = {{"rel_tol", c.quad.rel_tol},
               {"abs_tol", c.quad.abs_tol},
               {"max_panels", c.quad.max_panels},
               {"tail_sigmas", c.quad.tail_sigmas}};
  if (c.has_grid) {
    j["grid"] = {
        {"min", std::vector<double>(c.grid.min.data(),
                                    c.grid.min.data() + c.grid.min.size())},
        {"max", std::vector<double>(c.grid.max.data(),
                                    c.grid.max.data() + c.grid.max.size())},
        {"count", c.grid.count}};
  }
  j["output"] = {{"path", c.output.path}, {"format", c.output.format}};
  return j;
}

}  // namespace membrane
