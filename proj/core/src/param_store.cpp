#include "cqg/param_store.hpp"

#include <cmath>

namespace cqg {

namespace {

// splitmix64; keeps initialization independent of libstdc++'s distribution
// internals so seeded values are stable across toolchains.
std::uint64_t next_u64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double next_unit(std::uint64_t& state) {
  return static_cast<double>(next_u64(state) >> 11) * 0x1.0p-53;
}

}  // namespace

ParameterStore::ParameterStore(std::uint64_t seed) : seed_(seed), rng_state_(seed) {}

const Tensor& ParameterStore::create(const std::string& name, Shape shape, Init init) {
  if (params_.count(name)) throw ConfigError("duplicate parameter name: " + name);
  const std::size_t n = shape_size(shape);
  std::vector<double> values(n, 0.0);
  if (init.kind == Init::Kind::XavierUniform) {
    std::size_t fan_in = 0, fan_out = 0;
    if (shape.size() == 2) {
      fan_out = shape[0];
      fan_in = shape[1];
    } else {
      fan_in = fan_out = n;
    }
    if (init.fan_in) fan_in = *init.fan_in;
    if (init.fan_out) fan_out = *init.fan_out;
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : values) v = (2.0 * next_unit(rng_state_) - 1.0) * bound;
  }
  Param p;
  p.value = Tensor(std::move(shape), std::move(values));
  p.adam.m.assign(n, 0.0);
  p.adam.v.assign(n, 0.0);
  auto [it, ok] = params_.emplace(name, std::move(p));
  (void)ok;
  order_.push_back(name);
  return it->second.value;
}

bool ParameterStore::has(const std::string& name) const { return params_.count(name) > 0; }

ParameterStore::Param& ParameterStore::entry(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

const ParameterStore::Param& ParameterStore::entry(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

const Tensor& ParameterStore::get(const std::string& name) const { return entry(name).value; }

std::size_t ParameterStore::total_entries() const {
  std::size_t n = 0;
  for (const auto& [k, p] : params_) n += p.value.size();
  return n;
}

AdamState& ParameterStore::adam(const std::string& name) { return entry(name).adam; }
const AdamState& ParameterStore::adam(const std::string& name) const {
  return entry(name).adam;
}

void ParameterStore::set_values(const std::string& name, std::vector<double> values) {
  Param& p = entry(name);
  if (values.size() != p.value.size()) {
    throw ShapeError("set_values: size mismatch for " + name);
  }
  p.value = Tensor(p.value.shape(), std::move(values));
}

void ParameterStore::set_entry(const std::string& name, std::size_t i, double v) {
  Param& p = entry(name);
  std::vector<double> values = p.value.data();
  values.at(i) = v;
  p.value = Tensor(p.value.shape(), std::move(values));
}

void ParameterStore::set_adam(const std::string& name, AdamState state) {
  Param& p = entry(name);
  if (state.m.size() != p.value.size() || state.v.size() != p.value.size()) {
    throw ShapeError("set_adam: moment size mismatch for " + name);
  }
  p.adam = std::move(state);
}

Tensor ParameterStore::use(Tape& tape, const std::string& name) const {
  return tape.leaf(entry(name).value, "param:" + name);
}

void GradientMap::add(const std::string& name, std::vector<double> g) {
  grads_[name] = std::move(g);
}

void GradientMap::accumulate(const GradientMap& other) {
  for (const auto& [name, g] : other.grads_) {
    auto it = grads_.find(name);
    if (it == grads_.end()) {
      grads_[name] = g;
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) it->second[i] += g[i];
    }
  }
}

void GradientMap::scale(double s) {
  for (auto& [name, g] : grads_) {
    for (double& v : g) v *= s;
  }
}

const std::vector<double>* GradientMap::find(const std::string& name) const {
  auto it = grads_.find(name);
  return it == grads_.end() ? nullptr : &it->second;
}

GradientMap collect_param_grads(const Tape& tape, const ParameterStore& store) {
  GradientMap out;
  for (const std::string& name : store.names()) {
    const std::string key = "param:" + name;
    if (tape.has_key(key)) {
      out.add(name, tape.grad_by_key(key).data());
    } else {
      out.add(name, std::vector<double>(store.get(name).size(), 0.0));
    }
  }
  return out;
}

double check_gradients(ParameterStore& store,
                       const std::function<Tensor(Tape&)>& loss_fn, double epsilon) {
  Tape tape;
  Tensor loss = loss_fn(tape);
  tape.backward(loss);
  GradientMap analytic = collect_param_grads(tape, store);

  auto loss_value = [&]() {
    Tape t;
    return loss_fn(t).value();
  };

  double worst = 0.0;
  for (const std::string& name : store.names()) {
    const std::vector<double>* ga = analytic.find(name);
    const std::vector<double> base = store.get(name).data();
    for (std::size_t i = 0; i < base.size(); ++i) {
      store.set_entry(name, i, base[i] + epsilon);
      const double up = loss_value();
      store.set_entry(name, i, base[i] - epsilon);
      const double down = loss_value();
      store.set_entry(name, i, base[i]);
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = (*ga)[i];
      const double err =
          std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

void adam_step(ParameterStore& store, const GradientMap& grads, double lr, double beta1,
               double beta2, double eps) {
  for (const std::string& name : store.names()) {
    const std::vector<double>* g = grads.find(name);
    AdamState& st = store.adam(name);
    st.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.step));
    std::vector<double> values = store.get(name).data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double gi = g ? (*g)[i] : 0.0;
      st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * gi;
      st.v[i] = beta2 * st.v[i] + (1.0 - beta2) * gi * gi;
      const double mhat = st.m[i] / bc1;
      const double vhat = st.v[i] / bc2;
      values[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    store.set_values(name, std::move(values));
  }
}

}  // namespace cqg
