#include "qsgp/artifact.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace qsgp {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'Q', 'S', 'G', 'P', 'M', 'D', 'L', '\n'};

static_assert(std::endian::native == std::endian::little,
              "artifact payload is little-endian");

void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

void put_doubles(std::string& out, const double* data, Index count) {
  out.append(reinterpret_cast<const char*>(data),
             static_cast<std::size_t>(count) * sizeof(double));
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  void read(void* dst, std::size_t count) {
    if (pos + count > buf.size())
      throw ParseError("artifact: truncated file");
    std::memcpy(dst, buf.data() + pos, count);
    pos += count;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    read(&v, 8);
    return v;
  }
  VectorXd doubles(Index count) {
    VectorXd v(count);
    read(v.data(), static_cast<std::size_t>(count) * sizeof(double));
    return v;
  }
};

const char* kind_name(ExpansionKind k) {
  switch (k) {
    case ExpansionKind::kRffSeArd: return "rff_se_ard";
    case ExpansionKind::kInducingPoint: return "inducing_point";
    case ExpansionKind::kExplicitDictionary: return "explicit_dictionary";
  }
  throw std::logic_error("unreachable");
}

ExpansionKind kind_from_name(const std::string& name) {
  if (name == "rff_se_ard") return ExpansionKind::kRffSeArd;
  if (name == "inducing_point") return ExpansionKind::kInducingPoint;
  if (name == "explicit_dictionary") return ExpansionKind::kExplicitDictionary;
  throw ParseError("artifact: unknown expansion kind " + name);
}

// Hyperparameters serialize as one payload array
// [log_ls..., log_sf2, log_s2, log_b].
VectorXd hyper_to_vec(const Hyperparameters& h) {
  VectorXd v(h.input_dim() + 3);
  v.head(h.input_dim()) = h.log_lengthscales;
  v[h.input_dim()] = h.log_signal_variance;
  v[h.input_dim() + 1] = h.log_noise_variance;
  v[h.input_dim() + 2] = h.log_laplace_scale;
  return v;
}

Hyperparameters hyper_from_vec(const VectorXd& v, Index d) {
  require(v.size() == d + 3, "artifact: hyperparameter vector size");
  Hyperparameters h;
  h.log_lengthscales = v.head(d);
  h.log_signal_variance = v[d];
  h.log_noise_variance = v[d + 1];
  h.log_laplace_scale = v[d + 2];
  return h;
}

}  // namespace

ModelArtifact ModelArtifact::from_training(const BasisExpansion& ex,
                                           const TrainResult& result,
                                           const Standardizer& standardizer,
                                           const TrainConfig& config) {
  ModelArtifact art;
  art.kind = ex.kind();
  art.m = ex.m();
  art.input_dim = ex.input_dim();
  art.rff_seed = ex.seed();
  art.hyper = result.hyper;
  art.frozen_hyper = ex.hyper();
  if (ex.kind() != ExpansionKind::kRffSeArd) art.centers = ex.centers();
  if (ex.kind() == ExpansionKind::kExplicitDictionary)
    art.dictionary_s = ex.dictionary_s();
  art.mu = result.state.mu;
  art.chevron_k = result.state.C.dense_cols();
  for (Index r = 0; r < art.chevron_k; ++r) {
    VectorXd col(art.m - r);
    col[0] = result.state.C.log_diag_param(r);
    for (Index row = r + 1; row < art.m; ++row)
      col[row - r] = result.state.C.entry(row, r);
    art.dense_cols.push_back(std::move(col));
  }
  art.log_diag_tail = VectorXd(art.m - art.chevron_k);
  for (Index r = art.chevron_k; r < art.m; ++r)
    art.log_diag_tail[r - art.chevron_k] = result.state.C.log_diag_param(r);
  if (result.rvm) art.rvm_log_s = result.rvm->log_s;
  art.standardizer = standardizer;
  art.likelihood = config.likelihood;
  art.quad_points = config.quad_points;
  art.cfg_m_tilde = config.m_tilde;
  art.cfg_n_tilde = config.n_tilde;
  art.cfg_n_bar = config.n_bar;
  art.cfg_iterations = config.iterations;
  art.cfg_seed = config.seed;
  return art;
}

BasisExpansion ModelArtifact::expansion() const {
  switch (kind) {
    case ExpansionKind::kRffSeArd:
      return BasisExpansion::rff_se_ard(m, input_dim, rff_seed, hyper);
    case ExpansionKind::kInducingPoint:
      require(centers.has_value(), "artifact: missing centers");
      return BasisExpansion::inducing_point(*centers, hyper);
    case ExpansionKind::kExplicitDictionary:
      require(centers.has_value() && dictionary_s.has_value(),
              "artifact: missing dictionary");
      return BasisExpansion::explicit_dictionary(*centers, *dictionary_s,
                                                 hyper);
  }
  throw std::logic_error("unreachable");
}

VariationalState ModelArtifact::variational_state() const {
  VariationalState state(m, chevron_k);
  state.mu = mu;
  for (Index r = 0; r < chevron_k; ++r) {
    const VectorXd& col = dense_cols[static_cast<std::size_t>(r)];
    require(col.size() == m - r, "artifact: dense column size");
    state.C.set_param(r, r, col[0]);
    for (Index row = r + 1; row < m; ++row)
      state.C.set_param(row, r, col[row - r]);
  }
  require(log_diag_tail.size() == m - chevron_k,
          "artifact: diagonal tail size");
  for (Index r = chevron_k; r < m; ++r)
    state.C.set_param(r, r, log_diag_tail[r - chevron_k]);
  // positivity of the implied diagonal holds by the log parameterization;
  // reject non-finite parameters from damaged files
  for (Index r = 0; r < m; ++r)
    if (!std::isfinite(state.C.log_diag_param(r)))
      throw InvalidState("artifact: non-finite factor diagonal");
  return state;
}

void ModelArtifact::save(const std::string& path) const {
  json header;
  header["format_version"] = format_version;
  header["kind"] = kind_name(kind);
  header["m"] = m;
  header["input_dim"] = input_dim;
  header["rff_seed"] = rff_seed;
  header["chevron_k"] = chevron_k;
  header["likelihood"] = likelihood_name(likelihood);
  header["quad_points"] = quad_points;
  header["has_frozen_hyper"] = frozen_hyper.has_value();
  header["has_centers"] = centers.has_value();
  header["has_dictionary_s"] = dictionary_s.has_value();
  header["has_rvm_log_s"] = rvm_log_s.has_value();
  header["targets_standardized"] = standardizer.targets_standardized;
  header["config"] = {{"m_tilde", cfg_m_tilde}, {"n_tilde", cfg_n_tilde},
                      {"n_bar", cfg_n_bar},     {"iterations", cfg_iterations},
                      {"seed", cfg_seed}};
  const std::string header_text = header.dump();

  std::string payload;
  auto put_vec = [&payload](const VectorXd& v) {
    put_u64(payload, static_cast<std::uint64_t>(v.size()));
    put_doubles(payload, v.data(), v.size());
  };
  put_vec(hyper_to_vec(hyper));
  if (frozen_hyper) put_vec(hyper_to_vec(*frozen_hyper));
  if (centers) {
    put_u64(payload, static_cast<std::uint64_t>(centers->rows()));
    put_u64(payload, static_cast<std::uint64_t>(centers->cols()));
    put_doubles(payload, centers->data(), centers->size());
  }
  if (dictionary_s) put_vec(*dictionary_s);
  put_vec(mu);
  for (const auto& col : dense_cols) put_vec(col);
  put_vec(log_diag_tail);
  if (rvm_log_s) put_vec(*rvm_log_s);
  put_vec(standardizer.x_mean);
  put_vec(standardizer.x_scale);
  VectorXd ymeta(2);
  ymeta << standardizer.y_mean, standardizer.y_scale;
  put_vec(ymeta);

  std::string blob;
  blob.append(kMagic, 8);
  const auto fv = format_version;
  blob.append(reinterpret_cast<const char*>(&fv), 4);
  put_u64(blob, header_text.size());
  blob += header_text;
  blob += payload;

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("artifact: cannot write " + tmp);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw ParseError("artifact: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ParseError("artifact: rename failed for " + path);
}

ModelArtifact ModelArtifact::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("artifact: cannot open " + path);
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  Reader r{blob};
  char magic[8];
  r.read(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw ParseError("artifact: bad magic");
  ModelArtifact art;
  r.read(&art.format_version, 4);
  if (art.format_version != 1)
    throw ParseError("artifact: unsupported format version");
  const std::uint64_t header_len = r.u64();
  std::string header_text(header_len, '\0');
  r.read(header_text.data(), header_len);
  json header = json::parse(header_text);

  art.kind = kind_from_name(header.at("kind"));
  art.m = header.at("m");
  art.input_dim = header.at("input_dim");
  art.rff_seed = header.at("rff_seed");
  art.chevron_k = header.at("chevron_k");
  art.likelihood = likelihood_from_name(header.at("likelihood"));
  art.quad_points = header.at("quad_points");
  art.standardizer.targets_standardized = header.at("targets_standardized");
  const auto& cfg = header.at("config");
  art.cfg_m_tilde = cfg.at("m_tilde");
  art.cfg_n_tilde = cfg.at("n_tilde");
  art.cfg_n_bar = cfg.at("n_bar");
  art.cfg_iterations = cfg.at("iterations");
  art.cfg_seed = cfg.at("seed");

  auto get_vec = [&r]() {
    const auto count = static_cast<Index>(r.u64());
    return r.doubles(count);
  };
  art.hyper = hyper_from_vec(get_vec(), art.input_dim);
  if (header.at("has_frozen_hyper").get<bool>())
    art.frozen_hyper = hyper_from_vec(get_vec(), art.input_dim);
  if (header.at("has_centers").get<bool>()) {
    const auto rows = static_cast<Index>(r.u64());
    const auto cols = static_cast<Index>(r.u64());
    MatrixXd centers(rows, cols);
    r.read(centers.data(), static_cast<std::size_t>(centers.size()) *
                               sizeof(double));
    art.centers = std::move(centers);
  }
  if (header.at("has_dictionary_s").get<bool>()) art.dictionary_s = get_vec();
  art.mu = get_vec();
  for (Index c = 0; c < art.chevron_k; ++c) art.dense_cols.push_back(get_vec());
  art.log_diag_tail = get_vec();
  if (header.at("has_rvm_log_s").get<bool>()) art.rvm_log_s = get_vec();
  art.standardizer.x_mean = get_vec();
  art.standardizer.x_scale = get_vec();
  const VectorXd ymeta = get_vec();
  require(ymeta.size() == 2, "artifact: target stats size");
  art.standardizer.y_mean = ymeta[0];
  art.standardizer.y_scale = ymeta[1];
  return art;
}

}  // namespace qsgp
