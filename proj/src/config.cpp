#include "ppgf/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ppgf {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_double_str(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !parts.empty()) parts.push_back(trim(cur));
  return parts;
}

}  // namespace

const std::map<std::string, RunConfig::KeySpec>& RunConfig::schema() {
  using T = Type;
  static const std::map<std::string, KeySpec> s = {
      // dataset manifest
      {"path", {T::Str, ""}},
      {"target_column", {T::Str, ""}},
      {"train_frac", {T::Double, "0.6"}},
      {"valid_frac", {T::Double, "0.2"}},
      {"test_frac", {T::Double, "0.2"}},
      {"lookback", {T::Int, "32"}},
      {"horizon", {T::Int, "1"}},
      {"groups", {T::Int, "2"}},
      // model
      {"conv_channels", {T::Int, "8"}},
      {"conv_width", {T::Int, "3"}},
      {"model_dim", {T::Int, "16"}},
      {"hidden_dim", {T::Int, "32"}},
      {"heads", {T::Int, "2"}},
      {"lambda1", {T::Double, "1"}},
      {"lambda2", {T::Double, "1"}},
      {"lambda3", {T::Double, "5"}},
      {"aux_ce_weight", {T::Double, "1"}},
      {"detach_confidence_gate", {T::Bool, "true"}},
      {"ablation", {T::Str, ""}},
      // training
      {"batch_size", {T::Int, "32"}},
      {"max_epochs", {T::Int, "500"}},
      {"patience", {T::Int, "20"}},
      {"lr", {T::Double, "0.001"}},
      {"seed", {T::Int, "1"}},
      // grid search
      {"grid_lr", {T::DoubleList, "0.0001,0.0005,0.001,0.005"}},
      {"grid_groups", {T::IntList, "2,3,4,8"}},
      {"grid_lambda1", {T::DoubleList, "1,2,3,4,5"}},
      {"grid_lambda2", {T::DoubleList, "1,2,3,4,5"}},
      {"grid_lambda3", {T::DoubleList, "1,2,3,4,5"}},
      {"grid_budget", {T::Int, "0"}},
      {"jobs", {T::Int, "1"}},
      // run
      {"out_dir", {T::Str, "ppgf_run"}},
      {"threads", {T::Int, "0"}},
      {"eval_split", {T::Str, "test"}},
      {"checkpoint", {T::Str, ""}},
      {"autocorr_max_lag", {T::Int, "200"}},
  };
  return s;
}

RunConfig RunConfig::defaults() {
  RunConfig rc;
  for (const auto& [k, spec] : schema()) {
    rc.kv_[k] = spec.dflt;
    rc.touched_[k] = false;
  }
  return rc;
}

void RunConfig::check_value(const std::string& key, const KeySpec& spec, const std::string& value) {
  double d;
  switch (spec.type) {
    case Type::Str:
      return;
    case Type::Int: {
      if (!parse_double_str(value, &d) || d != std::floor(d))
        fail(Errc::ConfigError, "key '" + key + "' wants an integer, got '" + value + "'");
      return;
    }
    case Type::Double:
      if (!parse_double_str(value, &d)) fail(Errc::ConfigError, "key '" + key + "' wants a number, got '" + value + "'");
      return;
    case Type::Bool:
      if (value != "true" && value != "false" && value != "0" && value != "1")
        fail(Errc::ConfigError, "key '" + key + "' wants true/false, got '" + value + "'");
      return;
    case Type::DoubleList:
    case Type::IntList: {
      const auto parts = split_list(value);
      if (parts.empty()) fail(Errc::ConfigError, "key '" + key + "' wants a comma list, got '" + value + "'");
      for (const auto& p : parts) {
        if (!parse_double_str(p, &d)) fail(Errc::ConfigError, "key '" + key + "' has a bad element '" + p + "'");
        if (spec.type == Type::IntList && d != std::floor(d))
          fail(Errc::ConfigError, "key '" + key + "' wants integers, got '" + p + "'");
      }
      return;
    }
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = schema().find(key);
  if (it == schema().end()) fail(Errc::ConfigError, "unknown config key '" + key + "'");
  const std::string v = trim(value);
  check_value(key, it->second, v);
  kv_[key] = v;
  touched_[key] = true;
}

bool RunConfig::is_default(const std::string& key) const {
  auto it = touched_.find(key);
  return it == touched_.end() || !it->second;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::FileNotFound, "config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') continue;  // cosmetic section header
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(Errc::ConfigError, path + ":" + str(lineno) + ": expected key = value, got '" + t + "'");
    set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

std::string RunConfig::get_str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) fail(Errc::ConfigError, "unknown config key '" + key + "'");
  return it->second;
}

int64_t RunConfig::get_int(const std::string& key) const { return static_cast<int64_t>(get_double(key)); }

double RunConfig::get_double(const std::string& key) const {
  double d;
  if (!parse_double_str(get_str(key), &d)) fail(Errc::ConfigError, "key '" + key + "' is not numeric");
  return d;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string v = get_str(key);
  return v == "true" || v == "1";
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& p : split_list(get_str(key))) {
    double d;
    if (!parse_double_str(p, &d)) fail(Errc::ConfigError, "key '" + key + "' has a bad element '" + p + "'");
    out.push_back(d);
  }
  return out;
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (double d : get_double_list(key)) out.push_back(static_cast<int>(d));
  return out;
}

std::string RunConfig::resolved() const {
  std::ostringstream os;
  for (const auto& [k, v] : kv_) os << k << " = " << v << "\n";
  return os.str();
}

SplitSpec RunConfig::split_spec() const {
  SplitSpec s;
  s.train_frac = get_double("train_frac");
  s.valid_frac = get_double("valid_frac");
  s.test_frac = get_double("test_frac");
  return s;
}

PPGFConfig RunConfig::model_config(int data_channels) const {
  PPGFConfig cfg;
  cfg.L = static_cast<int>(get_int("lookback"));
  cfg.D = data_channels;
  cfg.T = static_cast<int>(get_int("horizon"));
  cfg.K = static_cast<int>(get_int("groups"));
  cfg.conv_channels = static_cast<int>(get_int("conv_channels"));
  cfg.conv_width = static_cast<int>(get_int("conv_width"));
  cfg.model_dim = static_cast<int>(get_int("model_dim"));
  cfg.hidden_dim = static_cast<int>(get_int("hidden_dim"));
  cfg.heads = static_cast<int>(get_int("heads"));
  cfg.lambda1 = get_double("lambda1");
  cfg.lambda2 = get_double("lambda2");
  cfg.lambda3 = get_double("lambda3");
  cfg.aux_ce_weight = get_double("aux_ce_weight");
  cfg.detach_confidence_gate = get_bool("detach_confidence_gate");
  cfg.lr = get_double("lr");
  cfg.seed = static_cast<uint64_t>(get_int("seed"));
  const std::string abl = get_str("ablation");
  if (!abl.empty())
    for (const auto& name : split_list(abl))
      if (!name.empty()) cfg.ablation.insert(ablation_from_name(name));
  cfg.validate();
  return cfg;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig tc;
  tc.batch_size = static_cast<int>(get_int("batch_size"));
  tc.max_epochs = static_cast<int>(get_int("max_epochs"));
  tc.patience = static_cast<int>(get_int("patience"));
  tc.lr = get_double("lr");
  tc.seed = static_cast<uint64_t>(get_int("seed"));
  tc.validate();
  return tc;
}

GridSpace RunConfig::grid_space() const {
  GridSpace g;
  g.lr = get_double_list("grid_lr");
  g.groups = get_int_list("grid_groups");
  g.lambda1 = get_double_list("grid_lambda1");
  g.lambda2 = get_double_list("grid_lambda2");
  g.lambda3 = get_double_list("grid_lambda3");
  if (g.size() == 0) fail(Errc::EmptyGrid, "grid space has no combinations");
  return g;
}

}  // namespace ppgf
