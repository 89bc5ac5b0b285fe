#include "idsnet/train_log.hpp"

#include <cstdio>

namespace idsnet {

std::string train_log_csv(const TrainLog& log) {
  std::string out = "epoch,train_loss,train_acc,val_loss,val_acc,seconds\n";
  char line[256];
  for (const auto& e : log.epochs) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g,%.9g,%.3f\n", e.epoch, e.train_loss, e.train_accuracy,
                  e.val_loss, e.val_accuracy, e.seconds);
    out += line;
  }
  return out;
}

}  // namespace idsnet
