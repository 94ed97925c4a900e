#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "roughhedge/labcli/labcli.hpp"
#include "roughhedge/mathkit/errors.hpp"

namespace roughhedge::labcli {

using nlohmann::json;

namespace {

// Reads the keys of one JSON object and rejects the ones nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(where() + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ValidationError(where(key) + ": expected a number");
    return v.get<double>();
  }

  long integer(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ValidationError(where(key) + ": expected an integer");
    return v.get<long>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) throw ValidationError(where(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ValidationError(where(key) + ": expected a boolean");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ValidationError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ValidationError(where(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) throw ValidationError(where(key) + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  const json* object(const std::string& key) {
    if (!has(key)) return nullptr;
    return &j_.at(key);
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ValidationError(where(it.key()) + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string payoff_name(PayoffKind k) {
  switch (k) {
    case PayoffKind::call: return "call";
    case PayoffKind::put: return "put";
    case PayoffKind::custom: return "custom";
  }
  return "call";
}

json schema_number(double minimum = -1e308, bool exclusive = false) {
  json s{{"type", "number"}};
  if (minimum > -1e308) s[exclusive ? "exclusiveMinimum" : "minimum"] = minimum;
  return s;
}

json schema_array_of_numbers() { return {{"type", "array"}, {"items", {{"type", "number"}}}}; }

json schema_object(json properties) {
  return {{"type", "object"}, {"additionalProperties", false}, {"properties", std::move(properties)}};
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  ObjectReader top(j, "");
  if (top.has("schema_version")) {
    if (top.integer("schema_version", kSchemaVersion) != kSchemaVersion)
      throw ValidationError("schema_version: unsupported version");
  }

  if (const json* m = top.object("model")) {
    ObjectReader r(*m, "model");
    const std::string kernel = r.string("kernel", "ou");
    const double eps = r.number("epsilon", 0.05);
    if (kernel == "ou") {
      if (r.has("hurst") && r.number("hurst", 0.5) != 0.5) throw ValidationError("model.hurst: ou kernel needs 0.5");
      c.model.kernel = KernelSpec::ou(eps);
    } else if (kernel == "fou") {
      c.model.kernel = KernelSpec::fou(r.number("hurst", 0.5), eps);
    } else {
      throw ValidationError("model.kernel: expected 'ou' or 'fou'");
    }
    c.model.sigma_z = r.number("sigma_z", 1.0);
    if (r.string("map", "exp_ou") != "exp_ou") throw ValidationError("model.map: only 'exp_ou' is supported");
    c.model.omega = r.number("omega", 0.5);
    c.model.sigma_bar = r.number("sigma_bar", 0.5);
    c.model.rho = r.number("rho", -0.5);
    r.finish();
  } else {
    c.model.kernel = KernelSpec::ou(0.05);
    c.model.rho = -0.5;
  }

  if (const json* g = top.object("grid")) {
    ObjectReader r(*g, "grid");
    c.grid.maturity = r.number("maturity", 1.0);
    c.grid.steps = static_cast<int>(r.integer("steps", 4096));
    c.grid.burn_in = r.number("burn_in", 50.0);
    r.finish();
  }

  if (const json* s = top.object("sampler")) {
    ObjectReader r(*s, "sampler");
    c.sampler.method = sampler_method_from_string(r.string("method", "automatic"));
    c.sampler.near_cells = static_cast<int>(r.integer("near_cells", 2));
    c.sampler.max_circulant = r.integer("max_circulant", 1L << 24);
    r.finish();
  }

  c.option = OptionSpec::call(1.0, c.grid.maturity);
  if (const json* o = top.object("option")) {
    ObjectReader r(*o, "option");
    const std::string payoff = r.string("payoff", "call");
    const double strike = r.number("strike", 1.0);
    const double maturity = r.number("maturity", c.grid.maturity);
    if (payoff == "call") {
      c.option = OptionSpec::call(strike, maturity);
    } else if (payoff == "put") {
      c.option = OptionSpec::put(strike, maturity);
    } else if (payoff == "custom") {
      c.option = OptionSpec::custom(strike, maturity, to_eigen(r.numbers("log_moneyness", {})),
                                    to_eigen(r.numbers("values", {})));
    } else {
      throw ValidationError("option.payoff: expected 'call', 'put' or 'custom'");
    }
    r.finish();
  }

  if (top.has("schemes")) {
    const json& arr = j.at("schemes");
    if (!arr.is_array()) throw ValidationError("schemes: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      ObjectReader r(arr[i], "schemes[" + std::to_string(i) + "]");
      SchemeConfig s;
      s.kind = scheme_kind_from_string(r.string("kind", "BS"));
      if (s.kind == SchemeKind::custom_da) throw ValidationError(r.where("kind") + ": custom_da is library-only");
      if (r.has("dcal")) {
        const json& d = arr[i].at("dcal");
        if (d.is_number()) {
          s.dcal = d.get<double>();
        } else if (!(d.is_string() && d.get<std::string>() == "theory")) {
          throw ValidationError(r.where("dcal") + ": expected a number or \"theory\"");
        }
      }
      r.finish();
      c.schemes.push_back(s);
    }
  } else {
    c.schemes = {{SchemeKind::H, {}}, {SchemeKind::HW, {}}, {SchemeKind::BS, {}}};
  }

  c.n_paths = top.integer("n_paths", c.n_paths);
  c.seed = top.unsigned_integer("seed", c.seed);
  c.moneyness_grid = top.numbers("moneyness_grid", c.moneyness_grid);
  c.exercise_times = top.numbers("exercise_times", {c.grid.maturity});
  c.output_dir = top.string("output_dir", c.output_dir);
  c.stride = static_cast<int>(top.integer("stride", 1));

  if (const json* s = top.object("surfaces")) {
    ObjectReader r(*s, "surfaces");
    c.surfaces.theta = r.numbers("theta", {});
    c.surfaces.d_minus = r.numbers("d_minus", {});
    c.surfaces.tau = r.numbers("tau", {});
    c.surfaces.moneyness = r.numbers("moneyness", {});
    r.finish();
  }
  if (c.surfaces.theta.empty()) {
    for (int i = 0; i <= 20; ++i) c.surfaces.theta.push_back(i / 20.0);
  }
  if (c.surfaces.d_minus.empty()) {
    for (int i = 0; i <= 40; ++i) c.surfaces.d_minus.push_back(-2.0 + i * 0.1);
  }

  if (const json* s = top.object("calibration")) {
    ObjectReader r(*s, "calibration");
    c.calibration.scheme = scheme_kind_from_string(r.string("scheme", "BS"));
    c.calibration.search.lower = r.number("lower", c.calibration.search.lower);
    c.calibration.search.upper = r.number("upper", c.calibration.search.upper);
    c.calibration.search.grid_points = static_cast<int>(r.integer("grid_points", c.calibration.search.grid_points));
    c.calibration.search.tolerance = r.number("tolerance", c.calibration.search.tolerance);
    r.finish();
  }

  if (const json* s = top.object("predict")) {
    ObjectReader r(*s, "predict");
    c.predict.monte_carlo = r.boolean("monte_carlo", false);
    r.finish();
  }
  top.finish();

  c.model.validate();
  c.grid.validate();
  c.option.validate();
  if (std::abs(c.option.maturity - c.grid.maturity) > 1e-12 * c.grid.maturity)
    throw ValidationError("option.maturity: must equal grid.maturity");
  if (c.n_paths < 2) throw ValidationError("n_paths: need at least 2 paths");
  if (c.stride < 1) throw ValidationError("stride: must be positive");
  if (c.sampler.near_cells < 0) throw ValidationError("sampler.near_cells: must be non-negative");
  if (c.moneyness_grid.empty()) throw ValidationError("moneyness_grid: must not be empty");
  for (double m : c.moneyness_grid)
    if (!(m > 0.0)) throw ValidationError("moneyness_grid: entries must be positive");
  if (c.exercise_times.empty()) throw ValidationError("exercise_times: must not be empty");
  for (double t : c.exercise_times)
    if (!(t > 0.0 && t <= c.grid.maturity)) throw ValidationError("exercise_times: entries must lie in (0, maturity]");
  for (double t : c.surfaces.theta)
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("surfaces.theta: entries must lie in [0, 1]");
  for (double t : c.surfaces.tau)
    if (!(t > 0.0)) throw ValidationError("surfaces.tau: entries must be positive");
  for (double m : c.surfaces.moneyness)
    if (!(m > 0.0)) throw ValidationError("surfaces.moneyness: entries must be positive");
  if (c.calibration.scheme != SchemeKind::HW && c.calibration.scheme != SchemeKind::BS)
    throw ValidationError("calibration.scheme: expected 'HW' or 'BS'");
  if (!(c.calibration.search.upper > c.calibration.search.lower) || c.calibration.search.grid_points < 3)
    throw ValidationError("calibration: need lower < upper and at least 3 grid points");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open config '" + file.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + file.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json ExperimentConfig::canonical() const {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["model"] = {{"kernel", model.kernel.kind == KernelKind::standard_ou ? "ou" : "fou"},
                {"hurst", model.kernel.hurst},
                {"epsilon", model.kernel.epsilon},
                {"sigma_z", model.sigma_z},
                {"map", "exp_ou"},
                {"omega", model.omega},
                {"sigma_bar", model.sigma_bar},
                {"rho", model.rho}};
  j["grid"] = {{"maturity", grid.maturity}, {"steps", grid.steps}, {"burn_in", grid.burn_in}};
  j["sampler"] = {{"method", to_string(sampler.method)},
                  {"near_cells", sampler.near_cells},
                  {"max_circulant", sampler.max_circulant}};
  j["option"] = {{"payoff", payoff_name(option.payoff)}, {"strike", option.strike}, {"maturity", option.maturity}};
  if (option.payoff == PayoffKind::custom) {
    j["option"]["log_moneyness"] = to_vector(option.log_moneyness);
    j["option"]["values"] = to_vector(option.payoff_values);
  }
  j["schemes"] = json::array();
  for (const auto& s : schemes) {
    json e{{"kind", to_string(s.kind)}};
    if (s.dcal)
      e["dcal"] = *s.dcal;
    else
      e["dcal"] = "theory";
    j["schemes"].push_back(e);
  }
  j["n_paths"] = n_paths;
  j["seed"] = seed;
  j["moneyness_grid"] = moneyness_grid;
  j["exercise_times"] = exercise_times;
  j["output_dir"] = output_dir;
  j["stride"] = stride;
  j["surfaces"] = {{"theta", surfaces.theta},
                   {"d_minus", surfaces.d_minus},
                   {"tau", surfaces.tau},
                   {"moneyness", surfaces.moneyness}};
  j["calibration"] = {{"scheme", to_string(calibration.scheme)},
                      {"lower", calibration.search.lower},
                      {"upper", calibration.search.upper},
                      {"grid_points", calibration.search.grid_points},
                      {"tolerance", calibration.search.tolerance}};
  j["predict"] = {{"monte_carlo", predict.monte_carlo}};
  return j;
}

std::string ExperimentConfig::hash() const {
  json j = canonical();
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json config_schema() {
  const json kinds = json::array({"H", "H_tilde", "HW", "BS"});
  json scheme = schema_object({{"kind", {{"enum", kinds}}},
                               {"dcal", {{"oneOf", json::array({{{"type", "number"}}, {{"const", "theory"}}})}}}});
  scheme["required"] = json::array({"kind"});
  json s = schema_object({
      {"schema_version", {{"const", kSchemaVersion}}},
      {"model", schema_object({{"kernel", {{"enum", json::array({"ou", "fou"})}}},
                               {"hurst", {{"type", "number"}, {"exclusiveMinimum", 0}, {"maximum", 0.5}}},
                               {"epsilon", schema_number(0.0, true)},
                               {"sigma_z", schema_number(0.0, true)},
                               {"map", {{"const", "exp_ou"}}},
                               {"omega", schema_number(0.0)},
                               {"sigma_bar", schema_number(0.0, true)},
                               {"rho", {{"type", "number"}, {"minimum", -1}, {"maximum", 1}}}})},
      {"grid", schema_object({{"maturity", schema_number(0.0, true)},
                              {"steps", {{"type", "integer"}, {"minimum", 2}}},
                              {"burn_in", schema_number(0.0)}})},
      {"sampler",
       schema_object({{"method",
                       {{"enum", json::array({"automatic", "exact_ou", "moving_average", "circulant_embedding"})}}},
                      {"near_cells", {{"type", "integer"}, {"minimum", 0}}},
                      {"max_circulant", {{"type", "integer"}, {"minimum", 1}}}})},
      {"option", schema_object({{"payoff", {{"enum", json::array({"call", "put", "custom"})}}},
                                {"strike", schema_number(0.0, true)},
                                {"maturity", schema_number(0.0, true)},
                                {"log_moneyness", schema_array_of_numbers()},
                                {"values", schema_array_of_numbers()}})},
      {"schemes", {{"type", "array"}, {"items", scheme}}},
      {"n_paths", {{"type", "integer"}, {"minimum", 2}}},
      {"seed", {{"type", "integer"}, {"minimum", 0}}},
      {"moneyness_grid", schema_array_of_numbers()},
      {"exercise_times", schema_array_of_numbers()},
      {"output_dir", {{"type", "string"}}},
      {"stride", {{"type", "integer"}, {"minimum", 1}}},
      {"surfaces", schema_object({{"theta", schema_array_of_numbers()},
                                  {"d_minus", schema_array_of_numbers()},
                                  {"tau", schema_array_of_numbers()},
                                  {"moneyness", schema_array_of_numbers()}})},
      {"calibration", schema_object({{"scheme", {{"enum", json::array({"HW", "BS"})}}},
                                     {"lower", {{"type", "number"}}},
                                     {"upper", {{"type", "number"}}},
                                     {"grid_points", {{"type", "integer"}, {"minimum", 3}}},
                                     {"tolerance", schema_number(0.0, true)}})},
      {"predict", schema_object({{"monte_carlo", {{"type", "boolean"}}}})},
  });
  s["$schema"] = "http://json-schema.org/draft-07/schema#";
  s["title"] = "roughhedge experiment config";
  return s;
}

}  // namespace roughhedge::labcli
