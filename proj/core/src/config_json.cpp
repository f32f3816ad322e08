#include "hgen/config_json.hpp"

#include "hgen/error.hpp"

namespace hgen {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string activation_to_string(const std::optional<Activation>& a) {
  if (!a) return "auto";
  return *a == Activation::relu ? "relu" : "elu";
}

std::optional<Activation> activation_from_string(const std::string& s) {
  if (s == "auto") return std::nullopt;
  if (s == "relu") return Activation::relu;
  if (s == "elu") return Activation::elu;
  throw ValidationError("config: activation must be auto|relu|elu");
}

}  // namespace

ordered_json configs_to_json(const ModelConfig& mc, const TrainConfig& tc) {
  ordered_json j;
  j["mode"] = to_string(mc.mode);
  j["backbone"] = to_string(mc.allele.backbone);
  j["num_layers"] = mc.allele.num_layers;
  j["hidden_dim"] = mc.allele.hidden_dim;
  j["dropout"] = mc.allele.dropout;
  j["gat_heads"] = mc.allele.gat_heads;
  j["leaky_slope"] = mc.allele.leaky_slope;
  j["activation"] = activation_to_string(mc.allele.activation);
  j["k"] = mc.num_replicas;
  j["attention_dim"] = mc.attention_dim;
  j["decoder_hidden"] = mc.decoder_hidden;
  j["lr"] = tc.lr;
  j["weight_decay"] = tc.weight_decay;
  j["max_epochs"] = tc.max_epochs;
  j["patience"] = tc.patience;
  j["lambda"] = tc.reg_weight;
  j["regularizer"] = tc.regularizer;
  j["feature_drop"] = tc.feature_drop;
  j["edge_drop"] = tc.edge_drop;
  j["seed"] = tc.seed;
  j["threads"] = tc.threads;
  j["exclude_s_diagonal"] = tc.exclude_s_diagonal;
  return j;
}

bool apply_config_key(const std::string& key, const ordered_json& value,
                      ModelConfig& mc, TrainConfig& tc) {
  try {
    if (key == "mode") mc.mode = mode_from_string(value.get<std::string>());
    else if (key == "backbone")
      mc.allele.backbone = backbone_from_string(value.get<std::string>());
    else if (key == "num_layers") mc.allele.num_layers = value.get<int>();
    else if (key == "hidden_dim") mc.allele.hidden_dim = value.get<Index>();
    else if (key == "dropout") mc.allele.dropout = value.get<double>();
    else if (key == "gat_heads") mc.allele.gat_heads = value.get<int>();
    else if (key == "leaky_slope") mc.allele.leaky_slope = value.get<double>();
    else if (key == "activation")
      mc.allele.activation = activation_from_string(value.get<std::string>());
    else if (key == "k") mc.num_replicas = value.get<int>();
    else if (key == "attention_dim") mc.attention_dim = value.get<Index>();
    else if (key == "decoder_hidden") mc.decoder_hidden = value.get<Index>();
    else if (key == "lr") tc.lr = value.get<double>();
    else if (key == "weight_decay") tc.weight_decay = value.get<double>();
    else if (key == "max_epochs") tc.max_epochs = value.get<int>();
    else if (key == "patience") tc.patience = value.get<int>();
    else if (key == "lambda") tc.reg_weight = value.get<double>();
    else if (key == "regularizer") tc.regularizer = value.get<bool>();
    else if (key == "feature_drop") tc.feature_drop = value.get<bool>();
    else if (key == "edge_drop") tc.edge_drop = value.get<double>();
    else if (key == "seed") tc.seed = value.get<std::uint64_t>();
    else if (key == "threads") tc.threads = value.get<int>();
    else if (key == "exclude_s_diagonal")
      tc.exclude_s_diagonal = value.get<bool>();
    else return false;
  } catch (const ordered_json::exception& e) {
    throw ValidationError("config: bad value for key '" + key + "': " + e.what());
  }
  return true;
}

void configs_from_json(const ordered_json& j, ModelConfig& mc, TrainConfig& tc) {
  for (const auto& [key, value] : j.items()) {
    if (!apply_config_key(key, value, mc, tc))
      throw ValidationError("config: unknown key '" + key + "'");
  }
}

}  // namespace hgen
