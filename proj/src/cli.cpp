#include "qsgp/cli.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qsgp/artifact.hpp"
#include "qsgp/diagnostics.hpp"
#include "qsgp/optimizer.hpp"
#include "qsgp/predictor.hpp"

namespace qsgp {

namespace {

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + tmp);
    out << text;
    if (!out) throw ParseError("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ParseError("rename failed for " + path);
}

void emit(const std::string& path, const std::string& text,
          std::ostream& fallback) {
  if (path.empty())
    fallback << text;
  else
    atomic_write(path, text);
}

int map_exception(const std::exception& e, std::ostream& log) {
  log << "error: " << e.what() << "\n";
  if (dynamic_cast<const ParseError*>(&e)) return kExitData;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return kExitData;
  if (dynamic_cast<const std::out_of_range*>(&e)) return kExitData;
  return kExitNumeric;
}

Dataset load_input(const std::string& data_path, const std::string& demo,
                   const std::string& header, Index target_column,
                   const std::string& delimiter, Likelihood lik,
                   std::uint64_t seed) {
  if (!demo.empty()) {
    if (demo != "sinc")
      throw std::invalid_argument("unknown demo dataset: " + demo);
    return make_sinc_dataset(500, 0.1, seed);
  }
  if (data_path.empty())
    throw std::invalid_argument("either --data or --demo is required");
  return load_csv(data_path, csv_options_from(header, target_column, delimiter),
                  lik);
}

struct LoadedModel {
  ModelArtifact artifact;
  BasisExpansion ex;
  VariationalState state;

  explicit LoadedModel(const std::string& path)
      : artifact(ModelArtifact::load(path)),
        ex(artifact.expansion()),
        state(artifact.variational_state()) {}
};

std::vector<PredictiveResult> predict_rows(const LoadedModel& model,
                                           const Dataset& data,
                                           bool augmented) {
  // model and data standardizers must agree; re-standardize the raw inputs
  // of the evaluation set with the model's transforms
  require(data.d() == model.ex.input_dim(),
          "prediction data dimension does not match the model");
  const auto& mst = model.artifact.standardizer;
  const auto& dst = data.standardizer;
  const double sigma_sq = model.artifact.hyper.noise_variance();
  std::vector<PredictiveResult> out;
  out.reserve(static_cast<std::size_t>(data.n()));
  for (Index i = 0; i < data.n(); ++i) {
    // undo the evaluation-set standardization, apply the model's
    VectorXd raw = data.X.row(i).transpose();
    for (Index k = 0; k < data.d(); ++k)
      raw[k] = raw[k] * dst.x_scale[k] + dst.x_mean[k];
    const VectorXd x = mst.apply_x(raw);
    PredictiveResult r = augmented
                             ? predict_augmented(model.state, model.ex, x,
                                                 sigma_sq)
                             : predict(model.state, model.ex, x, false);
    // back to response units
    r.mean = mst.invert_y_mean(r.mean);
    r.variance = mst.invert_y_variance(r.variance);
    if (r.augmented_variance)
      r.augmented_variance = mst.invert_y_variance(*r.augmented_variance);
    out.push_back(r);
  }
  return out;
}

}  // namespace

CsvOptions csv_options_from(const std::string& header, Index target_column,
                            const std::string& delimiter) {
  CsvOptions opt;
  if (header == "auto")
    opt.header = HeaderMode::kAuto;
  else if (header == "yes")
    opt.header = HeaderMode::kYes;
  else if (header == "no")
    opt.header = HeaderMode::kNo;
  else
    throw std::invalid_argument("--header must be auto, yes or no");
  opt.target_column = target_column;
  require(delimiter.size() == 1, "--delimiter must be a single character");
  opt.delimiter = delimiter[0];
  return opt;
}

int cmd_train(const TrainOptions& options, std::ostream& log) {
  // option conflicts are usage errors, before any file IO
  if (options.kernel != "rff" && options.kernel != "inducing" &&
      options.kernel != "rvm") {
    log << "error: --kernel must be rff, inducing or rvm\n";
    return kExitUsage;
  }
  if (options.kernel == "rvm" && options.likelihood != "gaussian") {
    log << "error: --kernel rvm supports the gaussian likelihood only\n";
    return kExitUsage;
  }
  if (options.kernel == "inducing" && options.learn_hyper) {
    log << "error: --learn-hyper needs a diagonal prior (use --kernel rff)\n";
    return kExitUsage;
  }
  if (options.out.empty()) {
    log << "error: --out is required\n";
    return kExitUsage;
  }

  try {
    const Likelihood lik = likelihood_from_name(options.likelihood);
    Dataset data =
        load_input(options.data_path, options.demo, options.header,
                   options.target_column, options.delimiter, lik, options.seed);

    auto hyper = Hyperparameters::isotropic(
        data.d(), options.lengthscale, options.signal_variance,
        options.noise_variance, options.laplace_scale);

    BasisExpansion ex = [&] {
      if (options.kernel == "rff") {
        Index m = options.m;
        if (m % 2 != 0) ++m;  // paired sin/cos features
        return BasisExpansion::rff_se_ard(m, data.d(), options.seed, hyper);
      }
      if (options.kernel == "inducing")
        return BasisExpansion::inducing_point(data.X, hyper);
      return BasisExpansion::explicit_dictionary(
          data.X, VectorXd::Ones(data.n()), hyper);
    }();

    TrainConfig config;
    config.m_tilde = std::min(options.m_tilde, ex.m());
    config.n_tilde = std::min(options.n_tilde, data.n());
    config.n_bar = std::min(options.n_bar, data.n());
    config.chevron_k = std::min(options.chevron_cols, ex.m());
    config.iterations = options.iters;
    config.lr_variational = options.lr_variational;
    config.lr_hyper = options.lr_hyper;
    config.hyper_freeze_iters = options.freeze_hyper_iters;
    config.likelihood = lik;
    config.quad_points = options.quad_points;
    config.seed = options.seed;
    config.log_every = options.log_every;
    config.diag_refresh = options.diag_refresh;
    config.learn_hyper = options.learn_hyper;
    config.rvm = options.kernel == "rvm";
    config.validate(data.n(), ex.m());

    TrainResult result = train(ex, data.X, data.y, config);

    if (!options.metrics.empty()) {
      std::ostringstream csv;
      csv << "# kernel=" << options.kernel << " likelihood="
          << options.likelihood << " m=" << ex.m() << " n=" << data.n()
          << " m_tilde=" << config.m_tilde << " n_tilde=" << config.n_tilde
          << " n_bar=" << config.n_bar << " chevron_cols=" << config.chevron_k
          << " iters=" << config.iterations << " lr_variational="
          << fmt_full(config.lr_variational) << " lr_hyper="
          << fmt_full(config.lr_hyper) << " freeze_hyper_iters="
          << config.effective_freeze() << " quad_points=" << config.quad_points
          << " seed=" << config.seed << "\n";
      csv << "iteration,elbo_estimate,l_mu_est,l_sigma_est,l_const_est,lr_v,"
             "lr_h,step_wall_ms\n";
      for (const auto& row : result.metrics)
        csv << row.iteration << "," << fmt_full(row.elbo_estimate) << ","
            << fmt_full(row.l_mu_est) << "," << fmt_full(row.l_sigma_est)
            << "," << fmt_full(row.l_const_est) << "," << fmt_full(row.lr_v)
            << "," << fmt_full(row.lr_h) << "," << fmt6(row.step_wall_ms)
            << "\n";
      atomic_write(options.metrics, csv.str());
    }

    auto artifact = ModelArtifact::from_training(ex, result,
                                                 data.standardizer, config);
    artifact.save(options.out);

    if (result.rejected_steps > 0)
      log << "warning: " << result.rejected_steps
          << " steps rejected on non-finite gradients\n";
    if (config.rvm && result.rvm) {
      auto pruned = rvm_prune(*result.rvm, result.state, ex);
      if (pruned.empty_model)
        log << "warning: every basis exceeded the prune threshold; the "
               "unpruned model was written\n";
      else
        log << "relevance vectors kept: " << pruned.kept.size() << " of "
            << ex.m() << "\n";
    }
    if (result.interrupted) {
      log << "error: training interrupted (" << result.error
          << "); checkpoint written to " << options.out << "\n";
      return kExitNumeric;
    }
    log << "model written to " << options.out << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return map_exception(e, log);
  }
}

int cmd_predict(const PredictOptions& options, std::ostream& log) {
  if (options.model_path.empty() || options.data_path.empty()) {
    log << "error: --model and --data are required\n";
    return kExitUsage;
  }
  try {
    LoadedModel model(options.model_path);
    if (options.augmented &&
        model.ex.kind() != ExpansionKind::kInducingPoint) {
      log << "error: --augmented needs an inducing-point model\n";
      return kExitUsage;
    }
    Dataset data = load_csv(
        options.data_path,
        csv_options_from(options.header, options.target_column,
                         options.delimiter),
        model.artifact.likelihood);
    auto preds = predict_rows(model, data, options.augmented);

    const bool logistic = model.artifact.likelihood == Likelihood::kLogistic;
    std::ostringstream csv;
    csv << "mean,variance";
    if (options.augmented) csv << ",augmented_variance";
    if (logistic) csv << ",probability";
    csv << "\n";
    for (const auto& r : preds) {
      csv << fmt_full(r.mean) << "," << fmt_full(r.variance);
      if (options.augmented)
        csv << "," << fmt_full(r.augmented_variance.value_or(r.variance));
      if (logistic)
        csv << ","
            << fmt_full(logistic_probability(r.mean, r.variance,
                                             model.artifact.quad_points));
      csv << "\n";
    }
    emit(options.out, csv.str(), log);
    return kExitOk;
  } catch (const std::exception& e) {
    return map_exception(e, log);
  }
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& log) {
  if (options.model_path.empty() || options.data_path.empty()) {
    log << "error: --model and --data are required\n";
    return kExitUsage;
  }
  try {
    LoadedModel model(options.model_path);
    Dataset data = load_csv(
        options.data_path,
        csv_options_from(options.header, options.target_column,
                         options.delimiter),
        model.artifact.likelihood);
    auto preds = predict_rows(model, data, false);

    const Likelihood lik = model.artifact.likelihood;
    double scale = 1.0;
    const auto& st = model.artifact.standardizer;
    if (lik == Likelihood::kGaussian)
      scale = st.invert_y_variance(model.artifact.hyper.noise_variance());
    else if (lik == Likelihood::kLaplace)
      scale = model.artifact.hyper.laplace_scale() *
              (st.targets_standardized ? st.y_scale : 1.0);
    auto metrics = evaluate(preds, data.y_raw, lik, scale,
                            model.artifact.quad_points);

    std::ostringstream csv;
    csv << "rmse,mnlp,accuracy\n"
        << fmt6(metrics.rmse) << "," << fmt6(metrics.mnlp) << ","
        << (metrics.has_accuracy ? fmt6(metrics.accuracy) : std::string())
        << "\n";
    emit(options.out, csv.str(), log);
    return kExitOk;
  } catch (const std::exception& e) {
    return map_exception(e, log);
  }
}

int cmd_diagnose(const DiagnoseOptions& options, std::ostream& log) {
  if (options.replicates <= 0) {
    log << "error: --replicates must be positive\n";
    return kExitUsage;
  }
  try {
    auto report = run_diagnostics(options.replicates, options.seed);
    std::ostringstream csv;
    csv << "term,mean,std_error,oracle,z\n";
    bool failed = false;
    for (const auto& row : report) {
      csv << row.term << "," << fmt_full(row.mean) << ","
          << fmt_full(row.std_error) << "," << fmt_full(row.oracle) << ","
          << fmt6(row.z) << "\n";
      if (std::abs(row.z) > 5.0) failed = true;
    }
    emit(options.out, csv.str(), log);
    if (failed) {
      log << "error: diagnostic z-score above 5\n";
      return kExitNumeric;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    return map_exception(e, log);
  }
}

}  // namespace qsgp
