#pragma once

// Shared synthetic fixtures. The "standard" fixture is the n=600 planted
// partition used by the acceptance suite; the mini fixture keeps unit
// tests fast. Aux types differ in signal strength so meta-paths are not
// interchangeable.

#include "hgen/ensemble.hpp"
#include "hgen/hetero_graph.hpp"

namespace hgen::testing {

inline SyntheticSpec standard_fixture_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.num_target_nodes = 600;
  spec.num_classes = 3;
  spec.class_centers = SyntheticSpec::default_centers(3, 12, 0.5);
  spec.noise_scale = 1.0;
  spec.aux_types = {
      {"venue", 120, 0.12, 0.020},
      {"actor", 90, 0.10, 0.030},
      {"tag", 150, 0.08, 0.040},
  };
  spec.train_ratio = 0.6;
  spec.val_ratio = 0.2;
  spec.test_ratio = 0.2;
  spec.seed = seed;
  return spec;
}

inline SyntheticSpec mini_fixture_spec(std::uint64_t seed, int num_aux = 2) {
  SyntheticSpec spec;
  spec.num_target_nodes = 60;
  spec.num_classes = 3;
  spec.class_centers = SyntheticSpec::default_centers(3, 6, 1.0);
  spec.noise_scale = 0.5;
  spec.aux_types = {{"venue", 30, 0.5, 0.05}};
  if (num_aux >= 2) spec.aux_types.push_back({"actor", 24, 0.4, 0.05});
  if (num_aux >= 3) spec.aux_types.push_back({"tag", 18, 0.3, 0.08});
  spec.train_ratio = 0.6;
  spec.val_ratio = 0.2;
  spec.test_ratio = 0.2;
  spec.seed = seed;
  return spec;
}

inline ModelConfig small_model_config(Backbone backbone = Backbone::gcn) {
  ModelConfig mc;
  mc.allele.backbone = backbone;
  mc.allele.num_layers = 2;
  mc.allele.hidden_dim = 16;
  mc.allele.dropout = 0.3;
  mc.num_replicas = 2;
  mc.attention_dim = 4;
  return mc;
}

inline TrainConfig fast_train_config(std::uint64_t seed, int epochs = 40) {
  TrainConfig tc;
  tc.seed = seed;
  tc.max_epochs = epochs;
  tc.patience = epochs;  // no early stop in short unit runs
  tc.threads = 1;
  return tc;
}

}  // namespace hgen::testing
