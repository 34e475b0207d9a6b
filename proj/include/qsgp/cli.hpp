#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "qsgp/common.hpp"
#include "qsgp/dataset.hpp"

namespace qsgp {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumeric = 3,
};

struct TrainOptions {
  std::string data_path;          // CSV input; empty when demo is set
  std::string demo;               // "sinc" generates the built-in dataset
  std::string likelihood = "gaussian";
  std::string kernel = "rff";     // rff | inducing | rvm
  Index m = 4096;                 // basis count (rff; inducing/rvm use m = n)
  Index m_tilde = 10000;
  Index n_tilde = 500;
  Index n_bar = 500;              // control-variate rank, 0 disables
  Index chevron_cols = 0;
  Index iters = 10000;
  double lr_variational = 0.1;
  double lr_hyper = 1e-5;
  Index freeze_hyper_iters = -1;  // -1: iters / 10
  int quad_points = 101;
  std::uint64_t seed = 0;
  std::string out;                // model artifact path
  std::string metrics;            // metrics CSV path
  Index log_every = 100;
  bool learn_hyper = false;
  Index diag_refresh = 0;
  double lengthscale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 0.1;
  double laplace_scale = 0.1;
  // CSV parsing
  std::string header = "auto";    // auto | yes | no
  Index target_column = -1;
  std::string delimiter = ",";
};

struct PredictOptions {
  std::string model_path;
  std::string data_path;
  std::string out;  // prediction CSV; empty = stdout
  bool augmented = false;
  std::string header = "auto";
  Index target_column = -1;
  std::string delimiter = ",";
};

struct EvaluateOptions {
  std::string model_path;
  std::string data_path;
  std::string out;  // metrics CSV row; empty = stdout
  std::string header = "auto";
  Index target_column = -1;
  std::string delimiter = ",";
};

struct DiagnoseOptions {
  Index replicates = 20000;
  std::uint64_t seed = 0;
  std::string out;  // CSV report; empty = stdout
};

int cmd_train(const TrainOptions& options, std::ostream& log);
int cmd_predict(const PredictOptions& options, std::ostream& log);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& log);
int cmd_diagnose(const DiagnoseOptions& options, std::ostream& log);

CsvOptions csv_options_from(const std::string& header, Index target_column,
                            const std::string& delimiter);

}  // namespace qsgp
