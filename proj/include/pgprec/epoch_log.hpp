#pragma once

#include <filesystem>
#include <vector>

#include "pgprec/losses.hpp"

namespace pgprec {

struct EpochLog {
  int epoch = 0;
  LossBreakdown loss;
  double val_recall = 0.0;
  double seconds = 0.0;  // optimization step wall-clock, validation excluded
};

// CSV `epoch,rec,cl_user,cl_item,l2,total,val_recall10,seconds`.
void write_epoch_csv(const std::filesystem::path& path, const std::vector<EpochLog>& logs);
std::vector<EpochLog> read_epoch_csv(const std::filesystem::path& path);

}  // namespace pgprec
