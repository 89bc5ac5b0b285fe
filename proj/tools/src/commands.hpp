#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace idsnet::cli {

struct RuntimeOptions {
  std::size_t threads = 1;
  bool deterministic = false;
};

struct PrepareOptions {
  std::string train_in;
  std::string test_in;
  std::string out;
  std::string classes = "normal,neptune,smurf";
};

struct TrainOptions {
  std::string data;
  std::string model = "cnn-lstm";
  std::size_t epochs = 10;
  std::size_t batch = 500;
  std::size_t eval_batch = 20;
  double val_frac = 0.30;
  std::uint64_t seed = 42;
  double lr = 1e-3;
  std::string optimizer = "adam";
  std::string precision = "single";
  std::string balance = "none";
  bool scale_onehot = false;
  std::string out;
  RuntimeOptions runtime;
};

struct EvaluateOptions {
  std::string model_file;
  std::string data;
  std::size_t batch = 20;
  std::string report;
  std::string confusion;
  std::string name;
  RuntimeOptions runtime;
};

struct AnalyzeOptions {
  std::string data;
  std::size_t top_k = 20;
  std::size_t samples = 100000;
  std::uint64_t seed = 42;
  std::string out;
  RuntimeOptions runtime;
};

struct GradcheckOptions {
  std::uint64_t seed = 42;
  std::string manifest = "gradcheck.manifest.json";
};

using Args = std::vector<std::string>;

int cmd_prepare(const PrepareOptions& o, const Args& args, std::ostream& out, std::ostream& err);
int cmd_train(const TrainOptions& o, const Args& args, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateOptions& o, const Args& args, std::ostream& out, std::ostream& err);
int cmd_analyze_svd(const AnalyzeOptions& o, const Args& args, std::ostream& out, std::ostream& err);
int cmd_analyze_pca(const AnalyzeOptions& o, const Args& args, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const GradcheckOptions& o, const Args& args, std::ostream& out, std::ostream& err);

}  // namespace idsnet::cli
