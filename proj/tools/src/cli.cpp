#include "idsnet_cli/cli.hpp"

#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "idsnet/errors.hpp"
#include "idsnet/version.hpp"

namespace idsnet::cli {

namespace {

void add_runtime_flags(CLI::App* cmd, RuntimeOptions& rt) {
  cmd->add_option("--threads", rt.threads, "Cap on worker threads inside kernels")->check(CLI::PositiveNumber);
  cmd->add_flag("--deterministic", rt.deterministic, "Single-threaded double-precision execution, timings zeroed");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Intrusion detection toolkit: KDD99 preparation, CNN-LSTM training and evaluation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  PrepareOptions prepare;
  auto* p = app.add_subcommand("prepare", "Filter raw KDD99 files into prepared datasets");
  p->add_option("--train-in", prepare.train_in, "Raw training file (10% subset)")->required();
  p->add_option("--test-in", prepare.test_in, "Raw test file (corrected)");
  p->add_option("--out", prepare.out, "Output directory")->required();
  p->add_option("--classes", prepare.classes, "Comma-separated classes to keep")->capture_default_str();

  TrainOptions train;
  auto* t = app.add_subcommand("train", "Train a model on a prepared training set");
  t->add_option("--data", train.data, "Prepared training dataset")->required();
  t->add_option("--model", train.model, "dnn, cnn, lstm or cnn-lstm")->capture_default_str();
  t->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
  t->add_option("--batch", train.batch, "Mini-batch size")->capture_default_str();
  t->add_option("--eval-batch", train.eval_batch, "Validation batch size")->capture_default_str();
  t->add_option("--val-frac", train.val_frac, "Validation holdout fraction")->capture_default_str();
  t->add_option("--seed", train.seed, "Seed for initialisation, split and shuffling")->capture_default_str();
  t->add_option("--lr", train.lr, "Learning rate")->capture_default_str();
  t->add_option("--optimizer", train.optimizer, "adam or sgd")->capture_default_str();
  t->add_option("--precision", train.precision, "single or double")->capture_default_str();
  t->add_option("--balance", train.balance, "none, upsample or downsample")->capture_default_str();
  t->add_flag("--scale-onehot", train.scale_onehot, "Standardise one-hot columns as well");
  t->add_option("--out", train.out, "Output directory")->required();
  add_runtime_flags(t, train.runtime);

  EvaluateOptions evaluate;
  auto* e = app.add_subcommand("evaluate", "Evaluate a checkpoint on a prepared test set");
  e->add_option("--model-file", evaluate.model_file, "Checkpoint written by train")->required();
  e->add_option("--data", evaluate.data, "Prepared test dataset")->required();
  e->add_option("--batch", evaluate.batch, "Evaluation batch size")->capture_default_str();
  e->add_option("--report", evaluate.report, "Report output path")->required();
  e->add_option("--confusion", evaluate.confusion, "Confusion CSV path (default: next to the report)");
  e->add_option("--name", evaluate.name, "Row label for the printed summary");
  add_runtime_flags(e, evaluate.runtime);

  AnalyzeOptions analyze;
  auto* a = app.add_subcommand("analyze", "Dataset diagnostics");
  a->require_subcommand(1);
  auto* svd = a->add_subcommand("svd", "Explained variance of singular values");
  svd->add_option("--data", analyze.data, "Prepared dataset")->required();
  svd->add_option("--top-k", analyze.top_k, "Components to report")->capture_default_str();
  svd->add_option("--samples", analyze.samples, "Row sample size")->capture_default_str();
  svd->add_option("--seed", analyze.seed, "Sampling seed")->capture_default_str();
  svd->add_option("--out", analyze.out, "Output CSV")->required();
  add_runtime_flags(svd, analyze.runtime);
  AnalyzeOptions pca_opts;
  pca_opts.samples = 90000;
  auto* pca = a->add_subcommand("pca", "Two-component principal projection");
  pca->add_option("--data", pca_opts.data, "Prepared dataset")->required();
  pca->add_option("--samples", pca_opts.samples, "Row sample size")->capture_default_str();
  pca->add_option("--seed", pca_opts.seed, "Sampling seed")->capture_default_str();
  pca->add_option("--out", pca_opts.out, "Output CSV")->required();
  add_runtime_flags(pca, pca_opts.runtime);

  GradcheckOptions gradcheck;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference gradient suite in double precision");
  g->add_option("--seed", gradcheck.seed, "Seed for inputs and sampled elements")->capture_default_str();
  g->add_option("--manifest", gradcheck.manifest, "Manifest path")->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& s : args) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
      err << "run '" << args.front() << " " << sub->get_name() << " --help' for usage\n";
    return kExitInput;
  }

  try {
    if (p->parsed()) return cmd_prepare(prepare, args, out, err);
    if (t->parsed()) return cmd_train(train, args, out, err);
    if (e->parsed()) return cmd_evaluate(evaluate, args, out, err);
    if (svd->parsed()) return cmd_analyze_svd(analyze, args, out, err);
    if (pca->parsed()) return cmd_analyze_pca(pca_opts, args, out, err);
    if (g->parsed()) return cmd_gradcheck(gradcheck, args, out, err);
  } catch (const CompatibilityError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitCompatibility;
  } catch (const NumericalError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitNumerical;
  } catch (const InputError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInput;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace idsnet::cli
