#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace idsnet {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::vector<double> step_losses;
  std::size_t best_epoch = 0;  // 0 until an epoch completes

  bool operator==(const TrainLog&) const = default;
};

// Header: epoch,train_loss,train_acc,val_loss,val_acc,seconds
std::string train_log_csv(const TrainLog& log);

}  // namespace idsnet
