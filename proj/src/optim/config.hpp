#pragma once

#include <string_view>

namespace rapo {

struct GrpoConfig {
  int group_size = 4;
  double eps_low = 0.2;
  double eps_high = 0.28;
  double beta = 5e-4;
  double std_floor = 1e-4;
  // Credit only the response tokens, not the leading strategy token.
  bool response_only_credit = false;

  void validate() const;
};

enum class TopKSource { teacher, student };
std::string_view to_string(TopKSource s);
TopKSource topk_source_from_string(std::string_view name);

struct SdpoConfig {
  double eta = 1e-3;
  int top_k = 256;
  double loss_cap = 2.0;
  double ema_coefficient = 0.5;
  TopKSource topk_source = TopKSource::teacher;

  void validate() const;
};

}  // namespace rapo
