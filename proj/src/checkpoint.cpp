#include "ppgf/checkpoint.hpp"

namespace ppgf {

nlohmann::json config_to_json(const PPGFConfig& cfg) {
  std::vector<std::string> abl;
  for (Ablation a : all_ablations())
    if (cfg.has(a)) abl.push_back(ablation_name(a));
  return {{"L", cfg.L},
          {"D", cfg.D},
          {"T", cfg.T},
          {"K", cfg.K},
          {"conv_channels", cfg.conv_channels},
          {"conv_width", cfg.conv_width},
          {"model_dim", cfg.model_dim},
          {"hidden_dim", cfg.hidden_dim},
          {"heads", cfg.heads},
          {"lambda1", cfg.lambda1},
          {"lambda2", cfg.lambda2},
          {"lambda3", cfg.lambda3},
          {"aux_ce_weight", cfg.aux_ce_weight},
          {"detach_confidence_gate", cfg.detach_confidence_gate},
          {"lr", cfg.lr},
          {"seed", cfg.seed},
          {"ablation", abl}};
}

PPGFConfig config_from_json(const nlohmann::json& j) {
  PPGFConfig cfg;
  cfg.L = j.at("L").get<int>();
  cfg.D = j.at("D").get<int>();
  cfg.T = j.at("T").get<int>();
  cfg.K = j.at("K").get<int>();
  cfg.conv_channels = j.at("conv_channels").get<int>();
  cfg.conv_width = j.at("conv_width").get<int>();
  cfg.model_dim = j.at("model_dim").get<int>();
  cfg.hidden_dim = j.at("hidden_dim").get<int>();
  cfg.heads = j.at("heads").get<int>();
  cfg.lambda1 = j.at("lambda1").get<double>();
  cfg.lambda2 = j.at("lambda2").get<double>();
  cfg.lambda3 = j.at("lambda3").get<double>();
  cfg.aux_ce_weight = j.at("aux_ce_weight").get<double>();
  cfg.detach_confidence_gate = j.at("detach_confidence_gate").get<bool>();
  cfg.lr = j.at("lr").get<double>();
  cfg.seed = j.at("seed").get<uint64_t>();
  for (const auto& s : j.at("ablation")) cfg.ablation.insert(ablation_from_name(s.get<std::string>()));
  return cfg;
}

}  // namespace ppgf
