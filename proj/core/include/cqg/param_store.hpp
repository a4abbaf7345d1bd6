#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cqg/tensor.hpp"

namespace cqg {

/// Parameter initialization rule.
struct Init {
  enum class Kind { XavierUniform, Zeros };
  Kind kind = Kind::XavierUniform;
  // Explicit fans override the shape-derived defaults (rank-2: fan_in = cols,
  // fan_out = rows; rank-1: fan_in = n, fan_out = n).
  std::optional<std::size_t> fan_in, fan_out;

  static Init xavier() { return {}; }
  static Init xavier(std::size_t in, std::size_t out) { return {Kind::XavierUniform, in, out}; }
  static Init zeros() { return {Kind::Zeros, {}, {}}; }
};

struct AdamState {
  std::vector<double> m, v;
  std::uint64_t step = 0;
};

/// Named trainable parameters with Adam moments. Creation order is fixed and
/// drives the RNG draws, so the same seed and creation sequence give
/// bit-identical initial values.
class ParameterStore {
public:
  explicit ParameterStore(std::uint64_t seed);

  const Tensor& create(const std::string& name, Shape shape, Init init);
  bool has(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t total_entries() const;

  AdamState& adam(const std::string& name);
  const AdamState& adam(const std::string& name) const;

  /// Replace a parameter's values (same length required).
  void set_values(const std::string& name, std::vector<double> values);
  void set_entry(const std::string& name, std::size_t i, double v);
  void set_adam(const std::string& name, AdamState state);

  /// The parameter as a differentiable leaf on the given tape; repeated use
  /// on one tape shares a single node.
  Tensor use(Tape& tape, const std::string& name) const;

private:
  struct Param {
    Tensor value;
    AdamState adam;
  };
  Param& entry(const std::string& name);
  const Param& entry(const std::string& name) const;

  std::uint64_t seed_;
  std::uint64_t rng_state_;
  std::map<std::string, Param> params_;
  std::vector<std::string> order_;
};

/// Gradients keyed by parameter name; missing names read as zeros.
class GradientMap {
public:
  void add(const std::string& name, std::vector<double> g);
  /// Accumulate another map into this one.
  void accumulate(const GradientMap& other);
  void scale(double s);
  const std::vector<double>* find(const std::string& name) const;

private:
  std::map<std::string, std::vector<double>> grads_;
};

/// Collect gradients for every parameter of the store after tape.backward();
/// parameters that never reached the loss get zeros.
GradientMap collect_param_grads(const Tape& tape, const ParameterStore& store);

/// Central-difference check of the analytic gradients of loss_fn, which must
/// rebuild the loss from the store's current values on the tape it is given.
/// Returns max over parameter entries of |a - n| / max(1, |a|, |n|).
double check_gradients(ParameterStore& store,
                       const std::function<Tensor(Tape&)>& loss_fn,
                       double epsilon = 1e-6);

/// One bias-corrected Adam update over every parameter in creation order.
void adam_step(ParameterStore& store, const GradientMap& grads, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

}  // namespace cqg
