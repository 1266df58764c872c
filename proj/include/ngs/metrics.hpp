#pragma once

#include <map>

namespace ngs {

struct EvalMetrics {
  double calc_acc = 0.0;
  double sym_acc = 0.0;
  std::map<int, double> calc_acc_by_length;
};

}  // namespace ngs
