#pragma once

#include <string>
#include <vector>

#include "ppgf/config.hpp"
#include "ppgf/eval.hpp"
#include "ppgf/train.hpp"

namespace ppgf {

// Everything the pipeline derives from a dataset manifest. The grouping
// scheme and normalizer are fit on the training split only.
struct PreparedData {
  SeriesFrame frame;
  Splits splits;
  Normalizer norm;
  GroupingScheme scheme;
  WindowedDataset wtrain, wvalid, wtest;
};

PreparedData prepare_data(const RunConfig& rc, bool equal_width_grouping);

const WindowedDataset& split_by_name(const PreparedData& pd, const std::string& name);

// Evaluation of a trained model on one windowed split; enforces the
// classification/forecast consistency constraint on every sample.
EvalReport evaluate_model(const PPGFModel<float>& model, const GroupingScheme& scheme, const WindowedDataset& w,
                          int batch_size);

// Builds, trains and evaluates one ablation variant (or the full model for
// an empty variant string) on the shared manifest.
EvalReport run_ablation(const std::string& variant, const RunConfig& rc);

struct AblationRow {
  std::string name;  // display name: ppgf, w/o_classifier, ...
  EvalReport report;
};

// command implementations; each writes its artifacts under out_dir
void cmd_prepare(const RunConfig& rc, const std::string& out_dir);
void cmd_train(const RunConfig& rc, const std::string& out_dir, bool grid);
EvalReport cmd_evaluate(const RunConfig& rc, const std::string& out_dir);
void cmd_predict(const RunConfig& rc, const std::string& out_dir);
std::vector<AblationRow> cmd_ablate(const RunConfig& rc, const std::string& out_dir);

// formatting/IO helpers shared with tests
void ensure_dir(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string fmt_g(double v);  // "%.9g"
std::string report_to_json(const EvalReport& r);

}  // namespace ppgf
