#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <ostream>

#include "idsnet/analysis.hpp"
#include "idsnet/bytes.hpp"
#include "idsnet/checkpoint.hpp"
#include "idsnet/dataset_store.hpp"
#include "idsnet/errors.hpp"
#include "idsnet/evaluation.hpp"
#include "idsnet/gradient_suite.hpp"
#include "idsnet/kdd_ingest.hpp"
#include "idsnet/parallel.hpp"
#include "idsnet/preprocess.hpp"
#include "idsnet/trainer.hpp"
#include "idsnet/train_log.hpp"
#include "idsnet_cli/cli.hpp"
#include "idsnet_cli/manifest.hpp"

namespace idsnet::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool left = false) {
  if (s.size() < width) s = left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
  return s;
}

void apply_runtime(const RuntimeOptions& rt, RunManifest& manifest) {
  set_max_threads(rt.deterministic ? 1 : rt.threads);
  manifest.flag("threads", max_threads());
  manifest.flag("deterministic", rt.deterministic);
}

// "<dir>/<stem>.manifest.json" next to a single output file.
fs::path sibling(const fs::path& output, const std::string& suffix) {
  auto p = output;
  p.replace_filename(output.stem().string() + suffix);
  return p;
}

void print_counts(std::ostream& out, const Dataset* train, const Dataset* test) {
  out << pad("class", 10, true) << pad("train", 10) << pad("test", 10) << "\n";
  std::size_t total_train = 0, total_test = 0;
  for (auto c : kAllClasses) {
    const auto k = class_index(c);
    out << pad(std::string(class_name(c)), 10, true) << pad(train ? std::to_string(train->counts()[k]) : "-", 10)
        << pad(test ? std::to_string(test->counts()[k]) : "-", 10) << "\n";
    if (train) total_train += train->counts()[k];
    if (test) total_test += test->counts()[k];
  }
  out << pad("total", 10, true) << pad(train ? std::to_string(total_train) : "-", 10)
      << pad(test ? std::to_string(total_test) : "-", 10) << "\n";
}

nlohmann::ordered_json counts_json(const Dataset& ds) {
  nlohmann::ordered_json j;
  for (auto c : kAllClasses) j[std::string(class_name(c))] = ds.counts()[class_index(c)];
  return j;
}

std::size_t classes_present(const Dataset& ds) {
  std::size_t n = 0;
  for (auto v : ds.counts()) n += v > 0;
  return n;
}

template <typename T>
int train_as(const TrainOptions& o, const TrainConfig& config, ModelKind kind, const Dataset& ds,
             const PreprocessorState& pre, RunManifest& manifest, std::ostream& out) {
  const auto x = transform<T>(pre, ds);
  Model<T> model(make_descriptor(kind, x.cols), o.seed);
  out << model_kind_name(kind) << ": " << x.cols << " features, " << model.parameter_count()
      << " trainable parameters, " << precision_name(config.precision) << " precision\n";
  for (const auto& line : model.summary()) out << "  " << line << "\n";
  out << "training on " << ds.size() << " rows, " << config.validation_fraction * 100.0 << "% held out for validation\n";

  const auto outcome = train(model, x, pre, config, [&](const EpochRecord& r) {
    out << "epoch " << r.epoch << "/" << config.epochs << "  loss " << fixed(r.train_loss, 4) << "  acc "
        << fixed(r.train_accuracy, 4) << "  val_loss " << fixed(r.val_loss, 4) << "  val_acc "
        << fixed(r.val_accuracy, 4) << "  " << fixed(r.seconds, 1) << "s" << std::endl;
  });

  const fs::path dir(o.out);
  fs::create_directories(dir);
  const auto ckpt_path = dir / "model.ckpt";
  const auto log_path = dir / "train_log.csv";
  save_checkpoint(outcome.best, ckpt_path);
  write_file_atomic(log_path, train_log_csv(outcome.log));

  const auto& best = outcome.log.epochs[outcome.log.best_epoch - 1];
  out << "best epoch " << outcome.log.best_epoch << ": val_acc " << fixed(best.val_accuracy, 4) << ", checkpoint "
      << ckpt_path.string() << "\n";

  double total_seconds = 0.0;
  nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
  for (const auto& r : outcome.log.epochs) {
    total_seconds += r.seconds;
    epochs.push_back({{"epoch", r.epoch},
                      {"train_loss", r.train_loss},
                      {"train_acc", r.train_accuracy},
                      {"val_loss", r.val_loss},
                      {"val_acc", r.val_accuracy},
                      {"seconds", r.seconds}});
  }
  manifest.results()["features"] = x.cols;
  manifest.results()["parameters"] = model.parameter_count();
  manifest.results()["best_epoch"] = outcome.log.best_epoch;
  manifest.results()["best_val_acc"] = best.val_accuracy;
  manifest.results()["epochs"] = epochs;
  if (config.record_timing) manifest.timing("mean_epoch_seconds", total_seconds / static_cast<double>(epochs.size()));
  manifest.output(ckpt_path);
  manifest.output(log_path);
  manifest.write(dir / "manifest.json");
  return kExitOk;
}

template <typename T>
EvalReport evaluate_as(const Checkpoint& ckpt, const Dataset& ds, std::size_t batch, std::ostream& err) {
  const auto x = transform<T>(ckpt.preprocessor, ds);
  if (x.unseen_categories)
    err << "warning: " << x.unseen_categories << " categorical values absent from the training vocabulary\n";
  return evaluate_checkpoint<T>(ckpt, x, batch);
}

}  // namespace

int cmd_prepare(const PrepareOptions& o, const Args& args, std::ostream& out, std::ostream& err) {
  RunManifest manifest("prepare", args);
  const auto keep = parse_class_list(o.classes);
  manifest.flag("train_in", o.train_in);
  manifest.flag("test_in", o.test_in);
  manifest.flag("out", o.out);
  manifest.flag("classes", o.classes);

  const auto train = filter_classes(parse_kdd_file(o.train_in), keep, Split::train);
  manifest.input(o.train_in);
  std::optional<Dataset> test;
  if (!o.test_in.empty()) {
    test = filter_classes(parse_kdd_file(o.test_in), keep, Split::test);
    manifest.input(o.test_in);
  }
  if (train.empty()) throw InputError(o.train_in + ": no records of the requested classes");
  if (classes_present(train) < 2)
    err << "warning: the prepared training set holds a single class; training needs at least 2\n";

  const fs::path dir(o.out);
  fs::create_directories(dir);
  const auto train_path = dir / "train.kddcol";
  save_dataset(train, train_path);
  manifest.output(train_path);
  manifest.results()["train_counts"] = counts_json(train);
  if (test) {
    const auto test_path = dir / "test.kddcol";
    save_dataset(*test, test_path);
    manifest.output(test_path);
    manifest.results()["test_counts"] = counts_json(*test);
  }
  print_counts(out, &train, test ? &*test : nullptr);
  manifest.write(dir / "manifest.json");
  return kExitOk;
}

int cmd_train(const TrainOptions& o, const Args& args, std::ostream& out, std::ostream& err) {
  RunManifest manifest("train", args);
  const auto kind = model_kind_from_name(o.model);
  if (!kind) throw InputError("unknown model '" + o.model + "' (expected dnn, cnn, lstm or cnn-lstm)");
  const auto optimizer = o.optimizer == "adam"  ? std::optional(OptimizerKind::adam)
                         : o.optimizer == "sgd" ? std::optional(OptimizerKind::sgd)
                                                : std::nullopt;
  if (!optimizer) throw InputError("unknown optimizer '" + o.optimizer + "' (expected adam or sgd)");
  auto precision = precision_from_name(o.precision);
  if (!precision) throw InputError("unknown precision '" + o.precision + "' (expected single or double)");
  const auto balance = resampling_from_name(o.balance);
  if (!balance) throw InputError("unknown balance mode '" + o.balance + "' (expected none, upsample or downsample)");
  if (o.runtime.deterministic && *precision != Precision::dual) {
    err << "note: --deterministic selects double precision\n";
    precision = Precision::dual;
  }

  TrainConfig config;
  config.epochs = o.epochs;
  config.batch_size = o.batch;
  config.eval_batch_size = o.eval_batch;
  config.validation_fraction = o.val_frac;
  config.seed = o.seed;
  config.optimizer.kind = *optimizer;
  config.optimizer.learning_rate = o.lr;
  config.precision = *precision;
  config.resampling = *balance;
  config.record_timing = !o.runtime.deterministic;
  config.validate();

  apply_runtime(o.runtime, manifest);
  manifest.seed(o.seed);
  manifest.flag("data", o.data);
  manifest.flag("model", std::string(model_kind_name(*kind)));
  manifest.flag("epochs", o.epochs);
  manifest.flag("batch", o.batch);
  manifest.flag("eval_batch", o.eval_batch);
  manifest.flag("val_frac", o.val_frac);
  manifest.flag("lr", o.lr);
  manifest.flag("optimizer", o.optimizer);
  manifest.flag("precision", std::string(precision_name(*precision)));
  manifest.flag("balance", o.balance);
  manifest.flag("scale_onehot", o.scale_onehot);
  manifest.flag("out", o.out);

  const auto ds = load_dataset(o.data);
  manifest.input(o.data);
  if (classes_present(ds) < 2) err << "warning: training data holds a single class\n";
  PreprocessorOptions popts;
  popts.scale_onehot = o.scale_onehot;
  const auto pre = fit_preprocessor(ds, popts);

  if (*precision == Precision::dual) return train_as<double>(o, config, *kind, ds, pre, manifest, out);
  return train_as<float>(o, config, *kind, ds, pre, manifest, out);
}

int cmd_evaluate(const EvaluateOptions& o, const Args& args, std::ostream& out, std::ostream& err) {
  RunManifest manifest("evaluate", args);
  if (o.batch == 0) throw InputError("--batch must be at least 1");
  apply_runtime(o.runtime, manifest);
  manifest.flag("model_file", o.model_file);
  manifest.flag("data", o.data);
  manifest.flag("batch", o.batch);
  manifest.flag("report", o.report);

  const auto ckpt = load_checkpoint(o.model_file);
  manifest.input(o.model_file);
  const auto ds = load_dataset(o.data);
  manifest.input(o.data);

  const auto report = ckpt.precision == Precision::dual ? evaluate_as<double>(ckpt, ds, o.batch, err)
                                                        : evaluate_as<float>(ckpt, ds, o.batch, err);

  const fs::path report_path(o.report);
  const fs::path confusion_path = o.confusion.empty() ? sibling(report_path, ".confusion.csv") : fs::path(o.confusion);
  if (report_path.has_parent_path()) fs::create_directories(report_path.parent_path());
  if (confusion_path.has_parent_path()) fs::create_directories(confusion_path.parent_path());
  write_file_atomic(report_path, format_report(report));
  write_file_atomic(confusion_path, confusion_csv(report.cm));

  const std::string name = o.name.empty() ? std::string(model_kind_name(ckpt.descriptor.kind)) : o.name;
  out << pad("model", 10, true) << pad("accuracy", 10) << pad("precision", 11) << pad("recall", 10) << pad("f1", 10)
      << pad("auc", 10) << "\n";
  out << pad(name, 10, true) << pad(fixed(report.accuracy * 100.0, 2) + "%", 10)
      << pad(fixed(report.macro.precision * 100.0, 2) + "%", 11) << pad(fixed(report.macro.recall * 100.0, 2) + "%", 10)
      << pad(fixed(report.macro.f1 * 100.0, 2) + "%", 10) << pad(fixed(report.auc.macro, 4), 10) << "\n";
  out << "(macro averages; weighted and micro in " << report_path.string() << ")\n";

  manifest.results()["accuracy"] = report.accuracy;
  manifest.results()["precision_macro"] = report.macro.precision;
  manifest.results()["recall_macro"] = report.macro.recall;
  manifest.results()["f1_macro"] = report.macro.f1;
  manifest.results()["auc_macro"] = report.auc.macro;
  manifest.results()["samples"] = report.samples;
  manifest.output(report_path);
  manifest.output(confusion_path);
  manifest.write(sibling(report_path, ".manifest.json"));
  return kExitOk;
}

int cmd_analyze_svd(const AnalyzeOptions& o, const Args& args, std::ostream& out, std::ostream&) {
  RunManifest manifest("analyze svd", args);
  apply_runtime(o.runtime, manifest);
  manifest.seed(o.seed);
  manifest.flag("data", o.data);
  manifest.flag("top_k", o.top_k);
  manifest.flag("samples", o.samples);
  manifest.flag("out", o.out);
  const auto ds = load_dataset(o.data);
  manifest.input(o.data);
  const auto x = transform<double>(fit_preprocessor(ds), ds);
  const auto profile = svd_variance(x, o.top_k, o.samples, o.seed);
  const fs::path path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  export_csv(profile, path);

  out << "singular values of " << profile.rows_used << " centred rows x " << x.cols << " features\n";
  for (std::size_t i = 0; i < profile.singular_values.size(); ++i)
    out << pad(std::to_string(i + 1), 4) << pad(fixed(profile.singular_values[i], 3), 14)
        << pad(fixed(profile.explained[i] * 100.0, 2) + "%", 10) << pad(fixed(profile.cumulative[i] * 100.0, 2) + "%", 10)
        << "\n";
  manifest.results()["rows_used"] = profile.rows_used;
  manifest.results()["cumulative"] = profile.cumulative;
  manifest.output(path);
  manifest.write(sibling(path, ".manifest.json"));
  return kExitOk;
}

int cmd_analyze_pca(const AnalyzeOptions& o, const Args& args, std::ostream& out, std::ostream&) {
  RunManifest manifest("analyze pca", args);
  apply_runtime(o.runtime, manifest);
  manifest.seed(o.seed);
  manifest.flag("data", o.data);
  manifest.flag("samples", o.samples);
  manifest.flag("out", o.out);
  const auto ds = load_dataset(o.data);
  manifest.input(o.data);
  const auto x = transform<double>(fit_preprocessor(ds), ds);
  const auto projection = pca_project(x, o.samples, o.seed);
  const fs::path path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  export_csv(projection, path);
  out << "projected " << projection.rows << " rows onto two components -> " << path.string() << "\n";
  manifest.results()["rows"] = projection.rows;
  manifest.output(path);
  manifest.write(sibling(path, ".manifest.json"));
  return kExitOk;
}

int cmd_gradcheck(const GradcheckOptions& o, const Args& args, std::ostream& out, std::ostream& err) {
  RunManifest manifest("gradcheck", args);
  manifest.seed(o.seed);
  manifest.flag("manifest", o.manifest);
  const auto results = run_gradient_suite(o.seed);
  bool ok = true;
  for (const auto& r : results) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", r.max_error);
    out << pad(r.name, 24, true) << pad(buf, 12) << "  (tolerance " << r.tolerance << ")  "
        << (r.passed() ? "ok" : "FAIL") << "\n";
    manifest.results()[r.name] = r.max_error;
    ok = ok && r.passed();
  }
  manifest.write(o.manifest);
  if (!ok) {
    err << "error: gradient check exceeded its tolerance\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace idsnet::cli
