#include "hjsafe/gp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hjsafe/parallel.hpp"

namespace hjsafe {

void GpHyperparams::validate(std::size_t input_dim) const {
  if (!(signal_var > 0.0)) throw std::invalid_argument("GP: signal variance must be > 0");
  if (!(noise_var >= 0.0)) throw std::invalid_argument("GP: noise variance must be >= 0");
  if (lengthscales.size() != input_dim)
    throw std::invalid_argument("GP: lengthscale count does not match input dim");
  for (double l : lengthscales)
    if (!(l > 0.0)) throw std::invalid_argument("GP: lengthscales must be > 0");
}

double GpModel::kernel(std::span<const double> a, std::span<const double> b) const {
  double q = 0.0;
  for (std::size_t d = 0; d < input_dim_; ++d) {
    const double r = (a[d] - b[d]) / hp_.lengthscales[d];
    q += r * r;
  }
  return hp_.signal_var * std::exp(-0.5 * q);
}

GpModel GpModel::prior(GpHyperparams hp) {
  GpModel m;
  m.input_dim_ = hp.lengthscales.size();
  hp.validate(m.input_dim_);
  m.hp_ = std::move(hp);
  return m;
}

namespace {

// evenly spaced subsample keeping first and last, deterministic
std::vector<std::size_t> uniform_subsample(std::size_t n, std::size_t cap) {
  std::vector<std::size_t> idx;
  if (n <= cap) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  idx.reserve(cap);
  for (std::size_t i = 0; i < cap; ++i)
    idx.push_back((i * (n - 1)) / (cap - 1));
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

struct FitResult {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd alpha;
  double lml = 0.0;
  bool ok = false;
};

FitResult factorize(const std::vector<std::vector<double>>& xs,
                    const Eigen::VectorXd& y, const GpHyperparams& hp) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  const std::size_t dim = hp.lengthscales.size();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      double q = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double r = (xs[i][d] - xs[j][d]) / hp.lengthscales[d];
        q += r * r;
      }
      const double v = hp.signal_var * std::exp(-0.5 * q);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  const double jitter = 1e-8 * hp.signal_var;
  k.diagonal().array() += hp.noise_var + jitter;

  FitResult out;
  out.llt.compute(k);
  if (out.llt.info() != Eigen::Success) return out;
  out.alpha = out.llt.solve(y);
  const double quad = y.dot(out.alpha);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(out.llt.matrixL()(i, i));
  out.lml = -0.5 * quad - logdet - 0.5 * double(n) * std::log(2.0 * std::numbers::pi);
  out.ok = true;
  return out;
}

std::vector<GpHyperparams> candidate_grid(const std::vector<std::vector<double>>& xs,
                                          const Eigen::VectorXd& y, std::size_t dim) {
  const double y_sd = std::max(std::sqrt(y.squaredNorm() / double(y.size()) + 1e-12), 1e-3);
  std::vector<double> range(dim, 1.0);
  for (std::size_t d = 0; d < dim; ++d) {
    double lo = xs[0][d], hi = xs[0][d];
    for (const auto& x : xs) {
      lo = std::min(lo, x[d]);
      hi = std::max(hi, x[d]);
    }
    range[d] = std::max(hi - lo, 1e-3);
  }

  std::vector<GpHyperparams> out;
  for (double sf : {0.5, 1.0, 2.0}) {
    for (double ls : {0.08, 0.2, 0.5, 1.0}) {
      for (double sn : {0.03, 0.08, 0.2, 0.5}) {
        GpHyperparams hp;
        hp.signal_var = (sf * y_sd) * (sf * y_sd);
        hp.lengthscales.assign(dim, 0.0);
        for (std::size_t d = 0; d < dim; ++d) hp.lengthscales[d] = ls * range[d];
        hp.noise_var = (sn * y_sd) * (sn * y_sd);
        out.push_back(std::move(hp));
      }
    }
  }
  return out;
}

}  // namespace

GpModel GpModel::fit(std::span<const DisturbanceMeasurement> data, const GpConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("GP fit: need at least one measurement");
  const std::size_t dim = data[0].x.size();
  for (const auto& m : data) {
    if (m.x.size() != dim) throw std::invalid_argument("GP fit: inconsistent input dims");
    for (double v : m.x)
      if (!std::isfinite(v)) throw std::invalid_argument("GP fit: non-finite input");
    if (!std::isfinite(m.value)) throw std::invalid_argument("GP fit: non-finite value");
  }

  const auto train_idx = uniform_subsample(data.size(), cfg.max_training);
  std::vector<std::vector<double>> xs;
  xs.reserve(train_idx.size());
  Eigen::VectorXd y(static_cast<Eigen::Index>(train_idx.size()));
  for (std::size_t i = 0; i < train_idx.size(); ++i) {
    xs.push_back(data[train_idx[i]].x);
    y(static_cast<Eigen::Index>(i)) = data[train_idx[i]].value;
  }

  GpHyperparams chosen = cfg.prior;
  if (cfg.policy == GpConfig::HyperPolicy::kSearch) {
    const auto search_idx = uniform_subsample(xs.size(), cfg.search_subsample);
    std::vector<std::vector<double>> sx;
    sx.reserve(search_idx.size());
    Eigen::VectorXd sy(static_cast<Eigen::Index>(search_idx.size()));
    for (std::size_t i = 0; i < search_idx.size(); ++i) {
      sx.push_back(xs[search_idx[i]]);
      sy(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(search_idx[i]));
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& hp : candidate_grid(sx, sy, dim)) {
      const auto fr = factorize(sx, sy, hp);
      if (fr.ok && fr.lml > best) {
        best = fr.lml;
        chosen = hp;
      }
    }
  } else {
    chosen.validate(dim);
  }
  if (chosen.lengthscales.size() != dim)
    throw std::invalid_argument("GP fit: fixed hyperparams do not match input dim");

  auto fr = factorize(xs, y, chosen);
  if (!fr.ok) throw std::runtime_error("GP fit: kernel matrix singular after jitter");

  GpModel m;
  m.hp_ = std::move(chosen);
  m.input_dim_ = dim;
  m.inputs_ = std::move(xs);
  m.lml_ = fr.lml;
  m.alpha_.assign(fr.alpha.data(), fr.alpha.data() + fr.alpha.size());
  const auto n = static_cast<std::size_t>(fr.llt.matrixL().rows());
  m.chol_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      m.chol_[i * n + j] = fr.llt.matrixL()(static_cast<Eigen::Index>(i),
                                            static_cast<Eigen::Index>(j));
  return m;
}

GpModel::Prediction GpModel::predict(std::span<const double> x) const {
  if (x.size() != input_dim_) throw std::invalid_argument("GP predict: input dim mismatch");
  if (inputs_.empty()) return {0.0, hp_.signal_var};  // prior

  const std::size_t n = inputs_.size();
  std::vector<double> kstar(n);
  for (std::size_t i = 0; i < n; ++i) kstar[i] = kernel(x, inputs_[i]);

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += kstar[i] * alpha_[i];

  // v = L^-1 k*, forward substitution
  std::vector<double> v(kstar);
  for (std::size_t i = 0; i < n; ++i) {
    double s = v[i];
    for (std::size_t j = 0; j < i; ++j) s -= chol_[i * n + j] * v[j];
    v[i] = s / chol_[i * n + i];
  }
  double var = hp_.signal_var;
  for (std::size_t i = 0; i < n; ++i) var -= v[i] * v[i];
  return {mean, std::max(var, 0.0)};
}

IntervalField bounds_on_grid(std::span<const GpModel> channel_models,
                             std::span<const std::vector<std::size_t>> input_dims,
                             const Grid& grid, double confidence, unsigned threads) {
  if (channel_models.size() != input_dims.size())
    throw std::invalid_argument("bounds_on_grid: one input-dim map per channel");
  IntervalField out(grid, channel_models.size());

  for (std::size_t ch = 0; ch < channel_models.size(); ++ch) {
    const auto& model = channel_models[ch];
    const auto& dims = input_dims[ch];
    if (dims.size() != model.input_dim())
      throw std::invalid_argument("bounds_on_grid: input-dim map does not match GP");
    for (std::size_t d : dims)
      if (d >= grid.ndims())
        throw std::invalid_argument("bounds_on_grid: input dim out of grid range");

    ScalarField& lo = out.lo(ch);
    ScalarField& hi = out.hi(ch);
    const std::size_t chunk = 2048;
    const std::size_t nchunks = (grid.size() + chunk - 1) / chunk;
    parallel_for(0, nchunks, threads, [&](std::size_t cidx) {
      const std::size_t begin = cidx * chunk;
      const std::size_t end = std::min(begin + chunk, grid.size());
      std::vector<std::size_t> idx(grid.ndims());
      std::vector<double> x(dims.size());
      for (std::size_t lin = begin; lin < end; ++lin) {
        grid.unravel(lin, idx);
        for (std::size_t d = 0; d < dims.size(); ++d)
          x[d] = grid.coord(dims[d], idx[dims[d]]);
        const auto p = model.predict(x);
        const double band =
            confidence * std::sqrt(p.variance + model.hyperparams().noise_var);
        lo[lin] = p.mean - band;
        hi[lin] = p.mean + band;
      }
    });
  }
  return out;
}

ViolationCheck violation_check(const IntervalField& field, std::size_t channel,
                               std::span<const double> x, double measured) {
  const Interval b = field.at(channel, x);
  ViolationCheck out;
  out.margin = std::min(measured - b.lo, b.hi - measured);
  out.inside = measured >= b.lo && measured <= b.hi;
  return out;
}

}  // namespace hjsafe
