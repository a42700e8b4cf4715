// Run-config files are JSON trees:
//
//   {
//     "T": 1024, "repeats": 20, "seed": 0,
//     "env": {"K": 4, "rho": 0.95, "noise_scale": 0.316, "confounded": true},
//     "policy": {
//       "kind": "div-els", "eta": null, "eta1": 1, "eta2": 1, "delta": 0.1,
//       "kernel": {"family": "polynomial", "degree": 3, "offset": 1},
//       "d_tilde": null, "nu": null, "nu_dim": null
//     },
//     "schedule": "doubling",
//     "output": "regret.csv"
//   }
//
// Every key is optional; missing keys keep their defaults. A metadata file
// written by emit_metadata is accepted too (its "config" member is used).

#include "divels/errors.hpp"
#include "divels/runner.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace divels {

namespace {

using nlohmann::json;

json kernel_to_json(const KernelSpec& k) {
  json j = {{"family", std::string(to_string(k.family))}};
  if (k.family == KernelFamily::Polynomial) {
    j["degree"] = k.degree;
    j["offset"] = k.offset;
  } else if (k.family == KernelFamily::Rbf) {
    j["bandwidth"] = k.bandwidth;
  }
  return j;
}

KernelSpec kernel_from_json(const json& j) {
  KernelSpec k;
  k.family = parse_kernel_family(j.at("family").get<std::string>());
  if (k.family == KernelFamily::Polynomial) {
    k.degree = j.value("degree", 3);
    k.offset = j.value("offset", 1.0);
  } else if (k.family == KernelFamily::Rbf) {
    k.bandwidth = j.value("bandwidth", 1.0);
  }
  return k;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
void read_optional(const json& obj, const char* key, std::optional<T>& out) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (v.is_null()) {
    out.reset();
  } else {
    out = v.get<T>();
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

RunConfig from_json(const json& root) {
  const json& j = root.contains("config") && root.at("config").is_object() ? root.at("config") : root;
  RunConfig c;
  read(j, "T", c.horizon);
  read(j, "repeats", c.repeats);
  read(j, "seed", c.base_seed);
  if (j.contains("env")) {
    const auto& e = j.at("env");
    read(e, "K", c.n_arms);
    read(e, "rho", c.rho);
    read(e, "noise_scale", c.noise_scale);
    read(e, "confounded", c.confounded);
  }
  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    if (p.contains("kind")) c.policy = parse_policy_kind(p.at("kind").get<std::string>());
    read_optional(p, "eta", c.eta);
    read(p, "eta1", c.eta1);
    read(p, "eta2", c.eta2);
    read(p, "delta", c.delta);
    if (p.contains("kernel")) c.kernel = kernel_from_json(p.at("kernel"));
    read_optional(p, "d_tilde", c.d_tilde);
    read_optional(p, "nu", c.nu);
    read_optional(p, "nu_dim", c.nu_dim);
  }
  if (j.contains("schedule")) c.schedule = parse_schedule_kind(j.at("schedule").get<std::string>());
  read(j, "output", c.output_path);
  return c;
}

}  // namespace

RunConfig parse_config(std::string_view json_text) {
  try {
    return from_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << file.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) {
  json j;
  j["T"] = c.horizon;
  j["repeats"] = c.repeats;
  j["seed"] = c.base_seed;
  j["env"] = {{"K", c.n_arms},
              {"rho", c.rho},
              {"noise_scale", c.noise_scale},
              {"confounded", c.confounded}};
  j["policy"] = {{"kind", std::string(to_string(c.policy))},
                 {"eta", optional_json(c.eta)},
                 {"eta1", c.eta1},
                 {"eta2", c.eta2},
                 {"delta", c.delta},
                 {"kernel", kernel_to_json(c.kernel)},
                 {"d_tilde", optional_json(c.d_tilde)},
                 {"nu", optional_json(c.nu)},
                 {"nu_dim", optional_json(c.nu_dim)}};
  j["schedule"] = std::string(to_string(c.schedule));
  j["output"] = c.output_path;
  return j.dump(2);
}

}  // namespace divels
