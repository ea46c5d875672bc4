#pragma once

#include <map>
#include <string>
#include <vector>

#include "ppgf/data.hpp"
#include "ppgf/model.hpp"
#include "ppgf/train.hpp"

namespace ppgf {

// Flat key=value configuration with a fixed schema. Files may contain blank
// lines, '#' comments and cosmetic [section] headers; keys are global and
// later assignments win. Unknown keys and malformed values are errors.
class RunConfig {
 public:
  enum class Type { Str, Int, Double, Bool, DoubleList, IntList };
  struct KeySpec {
    Type type;
    const char* dflt;
  };

  static const std::map<std::string, KeySpec>& schema();
  static RunConfig defaults();

  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  bool is_default(const std::string& key) const;

  std::string get_str(const std::string& key) const;
  int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  // Canonical text form: every key once, sorted, `key = value`. A resolved
  // file parses back into an identical config.
  std::string resolved() const;

  SplitSpec split_spec() const;
  PPGFConfig model_config(int data_channels) const;
  TrainConfig train_config() const;
  GridSpace grid_space() const;

 private:
  std::map<std::string, std::string> kv_;
  std::map<std::string, bool> touched_;
  static void check_value(const std::string& key, const KeySpec& spec, const std::string& value);
};

}  // namespace ppgf
