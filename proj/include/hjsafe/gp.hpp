#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hjsafe/grid.hpp"
#include "hjsafe/interval_field.hpp"

namespace hjsafe {

/// One disturbance sample: the (sub)state it was measured at and the
/// estimated disturbance value.
struct DisturbanceMeasurement {
  std::vector<double> x;
  double value = 0.0;
  double time = 0.0;
};

/// Squared-exponential kernel hyperparameters with per-dimension
/// lengthscales.
struct GpHyperparams {
  double signal_var = 0.01;  // sigma_f^2
  std::vector<double> lengthscales{1.0};
  double noise_var = 0.0;  // sigma_n^2

  void validate(std::size_t input_dim) const;
};

struct GpConfig {
  enum class HyperPolicy { kFixed, kSearch } policy = HyperPolicy::kSearch;
  GpHyperparams prior;  // used as-is under kFixed; prior band when no data
  /// O(n^3) factorization cap: fits subsample the data uniformly beyond this.
  std::size_t max_training = 500;
  /// Smaller cap used while scoring hyperparameter candidates.
  std::size_t search_subsample = 250;
};

/// Gaussian-process posterior over a scalar disturbance channel, zero prior
/// mean. Fit once, then predict/bounds are read-only and thread-safe.
class GpModel {
 public:
  GpModel() = default;

  /// Data-free model: prior mean 0, prior variance from the hyperparams.
  static GpModel prior(GpHyperparams hp);

  /// Condition on measurements; hyperparameters from log-marginal-likelihood
  /// grid search or taken as given, per config. Throws when the kernel
  /// matrix stays singular after jitter.
  static GpModel fit(std::span<const DisturbanceMeasurement> data, const GpConfig& cfg);

  struct Prediction {
    double mean = 0.0;
    double variance = 0.0;  // latent (noise-free) posterior variance
  };
  Prediction predict(std::span<const double> x) const;

  const GpHyperparams& hyperparams() const { return hp_; }
  std::size_t training_count() const { return inputs_.size(); }
  std::size_t input_dim() const { return input_dim_; }
  double log_marginal_likelihood() const { return lml_; }

 private:
  GpHyperparams hp_;
  std::size_t input_dim_ = 1;
  std::vector<std::vector<double>> inputs_;
  std::vector<double> alpha_;           // (K + sigma_n^2 I)^-1 y
  std::vector<double> chol_;            // lower-triangular factor, row-major
  double lml_ = 0.0;

  double kernel(std::span<const double> a, std::span<const double> b) const;
};

/// Sample the +-confidence*std band onto solver-grid nodes, one GP per
/// disturbance channel. `input_dims[ch]` names the grid dimensions each
/// channel's GP conditions on. The band uses the predictive std
/// sqrt(latent + noise), so it covers disturbance realizations, not just
/// the latent mean.
IntervalField bounds_on_grid(std::span<const GpModel> channel_models,
                             std::span<const std::vector<std::size_t>> input_dims,
                             const Grid& grid, double confidence = 3.0,
                             unsigned threads = 0);

struct ViolationCheck {
  bool inside = false;
  double margin = 0.0;  // min distance to either band edge; negative outside
};

/// Is a measured disturbance within the interval field at state x? The
/// interval is closed, so a value exactly on the edge counts as inside.
ViolationCheck violation_check(const IntervalField& field, std::size_t channel,
                               std::span<const double> x, double measured);

}  // namespace hjsafe
