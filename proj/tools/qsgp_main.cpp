#include <iostream>

#include <CLI11.hpp>

#include "qsgp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"quadruply stochastic sparse Gaussian process trainer"};
  app.require_subcommand(1);

  qsgp::TrainOptions topt;
  auto* train = app.add_subcommand("train", "fit a model and write an artifact");
  train->add_option("--data", topt.data_path, "training CSV (target column included)");
  train->add_option("--demo", topt.demo, "built-in dataset (sinc)");
  train->add_option("--likelihood", topt.likelihood,
                    "gaussian | laplace | logistic")
      ->capture_default_str();
  train->add_option("--kernel", topt.kernel, "rff | inducing | rvm")
      ->capture_default_str();
  train->add_option("--m", topt.m, "basis functions (rff)")->capture_default_str();
  train->add_option("--mtilde", topt.m_tilde, "basis mini-batch size")
      ->capture_default_str();
  train->add_option("--ntilde", topt.n_tilde, "row mini-batch size")
      ->capture_default_str();
  train->add_option("--cv-rank", topt.n_bar, "control-variate rank (0 = off)")
      ->capture_default_str();
  train->add_option("--chevron-cols", topt.chevron_cols,
                    "dense leading factor columns")
      ->capture_default_str();
  train->add_option("--iters", topt.iters, "SGD iterations")->capture_default_str();
  train->add_option("--lr-variational", topt.lr_variational,
                    "initial variational learning rate")
      ->capture_default_str();
  train->add_option("--lr-hyper", topt.lr_hyper, "initial hyper learning rate")
      ->capture_default_str();
  train->add_option("--freeze-hyper-iters", topt.freeze_hyper_iters,
                    "iterations with frozen hyperparameters (-1: iters/10)")
      ->capture_default_str();
  train->add_option("--quad-points", topt.quad_points,
                    "quadrature nodes for non-gaussian likelihoods")
      ->capture_default_str();
  train->add_option("--seed", topt.seed, "rng seed")->capture_default_str();
  train->add_option("--out", topt.out, "model artifact path")->required();
  train->add_option("--metrics", topt.metrics, "metrics CSV path");
  train->add_option("--log-every", topt.log_every, "metrics row period")
      ->capture_default_str();
  train->add_flag("--learn-hyper", topt.learn_hyper,
                  "empirical Bayes over kernel/likelihood scales");
  train->add_option("--diag-refresh", topt.diag_refresh,
                    "closed-form diagonal refresh period (0 = off)")
      ->capture_default_str();
  train->add_option("--lengthscale", topt.lengthscale,
                    "initial lengthscale (standardized inputs)")
      ->capture_default_str();
  train->add_option("--signal-variance", topt.signal_variance,
                    "initial kernel variance")
      ->capture_default_str();
  train->add_option("--noise-variance", topt.noise_variance,
                    "initial sigma^2 (standardized targets)")
      ->capture_default_str();
  train->add_option("--laplace-scale", topt.laplace_scale,
                    "initial laplace scale b")
      ->capture_default_str();
  train->add_option("--header", topt.header, "auto | yes | no")
      ->capture_default_str();
  train->add_option("--target-column", topt.target_column,
                    "0-based target column (-1: last)")
      ->capture_default_str();
  train->add_option("--delimiter", topt.delimiter, "CSV delimiter")
      ->capture_default_str();

  qsgp::PredictOptions popt;
  auto* predict = app.add_subcommand("predict", "per-row predictive moments");
  predict->add_option("--model", popt.model_path, "model artifact")->required();
  predict->add_option("--data", popt.data_path, "input CSV")->required();
  predict->add_option("--out", popt.out, "output CSV (default stdout)");
  predict->add_flag("--augmented", popt.augmented,
                    "augmented predictive variance (inducing models)");
  predict->add_option("--header", popt.header, "auto | yes | no")
      ->capture_default_str();
  predict->add_option("--target-column", popt.target_column,
                      "0-based target column (-1: last)")
      ->capture_default_str();
  predict->add_option("--delimiter", popt.delimiter, "CSV delimiter")
      ->capture_default_str();

  qsgp::EvaluateOptions eopt;
  auto* evaluate = app.add_subcommand("evaluate", "RMSE / MNLP / accuracy");
  evaluate->add_option("--model", eopt.model_path, "model artifact")->required();
  evaluate->add_option("--data", eopt.data_path, "held-out CSV")->required();
  evaluate->add_option("--out", eopt.out, "output CSV (default stdout)");
  evaluate->add_option("--header", eopt.header, "auto | yes | no")
      ->capture_default_str();
  evaluate->add_option("--target-column", eopt.target_column,
                       "0-based target column (-1: last)")
      ->capture_default_str();
  evaluate->add_option("--delimiter", eopt.delimiter, "CSV delimiter")
      ->capture_default_str();

  qsgp::DiagnoseOptions dopt;
  auto* diagnose =
      app.add_subcommand("diagnose", "estimator and control-variate checks");
  diagnose->add_option("--replicates", dopt.replicates,
                       "Monte Carlo replicates per check")
      ->capture_default_str();
  diagnose->add_option("--seed", dopt.seed, "rng seed")->capture_default_str();
  diagnose->add_option("--out", dopt.out, "report CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qsgp::kExitUsage;
  }

  if (train->parsed()) return qsgp::cmd_train(topt, std::cerr);
  if (predict->parsed()) return qsgp::cmd_predict(popt, std::cerr);
  if (evaluate->parsed()) return qsgp::cmd_evaluate(eopt, std::cerr);
  if (diagnose->parsed()) return qsgp::cmd_diagnose(dopt, std::cerr);
  return qsgp::kExitUsage;
}
