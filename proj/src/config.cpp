#include "patk/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "patk/error.hpp"

namespace patk {
namespace {

using nlohmann::json;

// Reads typed fields out of one section, collecting errors instead of
// stopping at the first.
class Section {
 public:
  Section(const json& root, const std::string& name, std::vector<std::string>& errors)
      : name_(name), errors_(errors) {
    if (!root.contains(name)) return;
    if (!root.at(name).is_object()) {
      errors_.push_back(name + ": expected an object");
      return;
    }
    obj_ = &root.at(name);
  }

  ~Section() {
    if (obj_ == nullptr) return;
    for (const auto& [key, _] : obj_->items()) {
      if (!known_.count(key)) errors_.push_back(name_ + "." + key + ": unknown key");
    }
  }

  template <class T>
  void read(const std::string& key, T& out) {
    known_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) return;
    const json& v = obj_->at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::runtime_error("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::runtime_error("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.get<long long>() < 0) throw std::runtime_error("expected a non-negative integer");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::runtime_error("expected a number");
      } else {
        if (!v.is_string()) throw std::runtime_error("expected a string");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      errors_.push_back(name_ + "." + key + ": " + e.what());
    }
  }

 private:
  std::string name_;
  std::vector<std::string>& errors_;
  const json* obj_ = nullptr;
  std::set<std::string> known_;
};

template <class F>
void collect(std::vector<std::string>& errors, const std::string& section, F&& check) {
  try {
    check();
  } catch (const Error& e) {
    std::istringstream lines(e.what());
    std::string line;
    std::getline(lines, line);  // header
    bool any = false;
    while (std::getline(lines, line)) {
      const auto start = line.find_first_not_of(' ');
      errors.push_back(section + ": " + line.substr(start == std::string::npos ? 0 : start));
      any = true;
    }
    if (!any) errors.push_back(section + ": " + e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  std::vector<std::string> errors;
  RunConfig cfg;
  PipelineConfig& p = cfg.pipeline;
  static const std::set<std::string> sections{"simulation", "crop",    "probe",   "medium",
                                              "model",      "phantom", "ground_truth",
                                              "fista",      "dataset", "noise",   "threads"};
  for (const auto& [key, _] : root.items()) {
    if (!sections.count(key)) errors.push_back(key + ": unknown section");
  }

  std::size_t sim_rows = p.simulation.rows;
  std::size_t sim_cols = p.simulation.cols;
  double sim_pitch = p.simulation.pitch;
  double cx = p.simulation.center_x();
  double cz = p.simulation.center_z();
  {
    Section s(root, "simulation", errors);
    s.read("rows", sim_rows);
    s.read("cols", sim_cols);
    s.read("pitch_m", sim_pitch);
    s.read("center_x_m", cx);
    s.read("center_z_m", cz);
  }
  {
    Section s(root, "crop", errors);
    s.read("rows", p.crop_rows);
    s.read("cols", p.crop_cols);
  }
  std::size_t n_samples = 0;  // 0: cover the simulation area
  {
    Section s(root, "probe", errors);
    s.read("n_elements", p.probe.n_elements);
    s.read("pitch_m", p.probe.pitch);
    s.read("f_center_hz", p.probe.f_center);
    s.read("fractional_bandwidth", p.probe.fractional_bandwidth);
    s.read("fs_hz", p.probe.fs);
    s.read("n_samples", n_samples);
    s.read("t0_s", p.probe.t0);
  }
  {
    Section s(root, "medium", errors);
    s.read("c_m_per_s", p.medium.c);
  }
  {
    Section s(root, "model", errors);
    s.read("spreading_exponent", p.model.spreading_exponent);
    s.read("acceptance_deg", p.model.acceptance_deg);
  }
  {
    Section s(root, "phantom", errors);
    auto& b = p.phantom;
    s.read("trunk_count", b.trunk_count);
    s.read("depth", b.depth);
    s.read("width_min_px", b.width_min_px);
    s.read("width_max_px", b.width_max_px);
    s.read("branch_probability", b.branch_probability);
    s.read("curvature", b.curvature);
    s.read("step_px", b.step_px);
    s.read("trunk_length_frac", b.trunk_length_frac);
    s.read("child_length_ratio", b.child_length_ratio);
    s.read("taper", b.taper);
  }
  {
    Section s(root, "ground_truth", errors);
    s.read("threshold", p.gt_threshold);
  }
  std::string penalty = to_string(cfg.fista.penalty);
  {
    Section s(root, "fista", errors);
    s.read("alpha", cfg.fista.alpha);
    s.read("max_iters", cfg.fista.max_iters);
    s.read("rel_tol", cfg.fista.rel_tol);
    s.read("penalty", penalty);
    s.read("nonnegative", cfg.fista.nonnegative);
    s.read("power_iters", cfg.fista.power_iters);
    s.read("seed", cfg.fista.seed);
  }
  std::string input_kind = to_string(cfg.dataset.input_kind);
  std::string provenance = to_string(cfg.dataset.provenance);
  {
    Section s(root, "dataset", errors);
    auto& d = cfg.dataset;
    s.read("n_train", d.n_train);
    s.read("n_val", d.n_val);
    s.read("n_test", d.n_test);
    s.read("input_kind", input_kind);
    s.read("provenance", provenance);
    s.read("snr", d.snr);
    s.read("bandwidth_jitter", d.bandwidth_jitter);
    s.read("frequency_jitter", d.frequency_jitter);
    s.read("seed", d.seed);
    s.read("augment", d.augment);
  }
  {
    Section s(root, "noise", errors);
    s.read("snr", cfg.noise_snr);
  }
  if (root.contains("threads")) {
    if (root.at("threads").is_number_integer()) {
      cfg.threads = root.at("threads").get<int>();
    } else {
      errors.push_back("threads: expected an integer");
    }
  }

  collect(errors, "fista", [&] { cfg.fista.penalty = parse_penalty(penalty); });
  collect(errors, "dataset", [&] { cfg.dataset.input_kind = parse_beamform_kind(input_kind); });
  collect(errors, "dataset", [&] {
    if (provenance == "clean" || provenance == "simulated") {
      cfg.dataset.provenance = Provenance::simulated;
    } else if (provenance == "noisy") {
      cfg.dataset.provenance = Provenance::noisy;
    } else {
      throw InvalidArgument("provenance must be clean or noisy");
    }
  });

  p.simulation = Grid::centered(sim_rows, sim_cols, sim_pitch, cx, cz);
  p.phantom.grid = p.simulation;
  collect(errors, "simulation", [&] {
    validate(p.simulation);
    if (!(p.simulation.z0 > 0.0)) throw InvalidArgument("simulation area must lie at z > 0");
  });
  collect(errors, "crop", [&] {
    if (p.crop_rows == 0 || p.crop_cols == 0) throw InvalidArgument("crop must be non-empty");
    if (p.crop_rows > sim_rows || p.crop_cols > sim_cols) {
      throw InvalidArgument("crop is larger than the simulation area");
    }
  });
  collect(errors, "medium", [&] { validate(p.medium); });
  collect(errors, "model", [&] {
    if (!(p.model.acceptance_deg > 0.0 && p.model.acceptance_deg <= 90.0)) {
      throw InvalidArgument("acceptance_deg must be in (0, 90]");
    }
  });
  collect(errors, "probe", [&] {
    ProbeConfig probe = p.probe;
    probe.n_samples = 2;
    validate(probe);
    if (n_samples == 0 && p.simulation.size() > 0 && p.medium.c > 0.0) {
      p.probe = covering(p.probe, p.simulation, p.medium);
    } else {
      p.probe.n_samples = n_samples;
      validate(p.probe);
    }
  });
  collect(errors, "phantom", [&] { validate(p.phantom); });
  collect(errors, "ground_truth", [&] {
    if (!(p.gt_threshold >= 0.0 && p.gt_threshold < 1.0)) {
      throw InvalidArgument("threshold must be in [0, 1)");
    }
  });
  collect(errors, "fista", [&] { validate(cfg.fista); });
  collect(errors, "dataset", [&] { validate(cfg.dataset); });
  collect(errors, "noise", [&] {
    if (!(cfg.noise_snr > 0.0)) throw InvalidArgument("snr must be > 0");
  });

  if (!errors.empty()) {
    std::string msg = "invalid configuration (" + std::to_string(errors.size()) + " problems):";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_json(const RunConfig& cfg) {
  const auto& p = cfg.pipeline;
  const auto& b = p.phantom;
  const auto& d = cfg.dataset;
  json j;
  j["simulation"] = {{"rows", p.simulation.rows},          {"cols", p.simulation.cols},
                     {"pitch_m", p.simulation.pitch},      {"center_x_m", p.simulation.center_x()},
                     {"center_z_m", p.simulation.center_z()}};
  j["crop"] = {{"rows", p.crop_rows}, {"cols", p.crop_cols}};
  j["probe"] = {{"n_elements", p.probe.n_elements},
                {"pitch_m", p.probe.pitch},
                {"f_center_hz", p.probe.f_center},
                {"fractional_bandwidth", p.probe.fractional_bandwidth},
                {"fs_hz", p.probe.fs},
                {"n_samples", p.probe.n_samples},
                {"t0_s", p.probe.t0}};
  j["medium"] = {{"c_m_per_s", p.medium.c}};
  j["model"] = {{"spreading_exponent", p.model.spreading_exponent},
                {"acceptance_deg", p.model.acceptance_deg}};
  j["phantom"] = {{"trunk_count", b.trunk_count},
                  {"depth", b.depth},
                  {"width_min_px", b.width_min_px},
                  {"width_max_px", b.width_max_px},
                  {"branch_probability", b.branch_probability},
                  {"curvature", b.curvature},
                  {"step_px", b.step_px},
                  {"trunk_length_frac", b.trunk_length_frac},
                  {"child_length_ratio", b.child_length_ratio},
                  {"taper", b.taper}};
  j["ground_truth"] = {{"threshold", p.gt_threshold}};
  j["fista"] = {{"alpha", cfg.fista.alpha},
                {"max_iters", cfg.fista.max_iters},
                {"rel_tol", cfg.fista.rel_tol},
                {"penalty", to_string(cfg.fista.penalty)},
                {"nonnegative", cfg.fista.nonnegative},
                {"power_iters", cfg.fista.power_iters},
                {"seed", cfg.fista.seed}};
  j["dataset"] = {{"n_train", d.n_train},
                  {"n_val", d.n_val},
                  {"n_test", d.n_test},
                  {"input_kind", to_string(d.input_kind)},
                  {"provenance", d.provenance == Provenance::simulated ? "clean" : "noisy"},
                  {"snr", d.snr},
                  {"bandwidth_jitter", d.bandwidth_jitter},
                  {"frequency_jitter", d.frequency_jitter},
                  {"seed", d.seed},
                  {"augment", d.augment}};
  j["noise"] = {{"snr", cfg.noise_snr}};
  j["threads"] = cfg.threads;
  return j.dump(2) + "\n";
}

}  // namespace patk
