#include "dcdgan/params.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <memory>

#include "dcdgan/errors.hpp"

namespace dcdgan {

namespace {

static_assert(std::endian::native == std::endian::little, "serialization assumes a little-endian host");

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) { EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr); }
  void update(const void* data, std::size_t len) { EVP_DigestUpdate(ctx_.get(), data, len); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 0xf]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

void feed(Sha256& h, const std::string& path, const Tensor& value) {
  if (!value.all_finite()) throw ValidationError("non-finite parameter: " + path);
  h.update(path.data(), path.size());
  const char nul = '\0';
  h.update(&nul, 1);
  const Shape s = value.shape();
  const std::int64_t dims[4] = {s.n, s.c, s.h, s.w};
  h.update(dims, sizeof(dims));
  h.update(value.data(), static_cast<std::size_t>(value.size()) * sizeof(double));
}

}  // namespace

void ParameterSet::add(const std::string& path, Tensor value, bool frozen) {
  if (entries_.count(path)) throw ConfigError("duplicate parameter path: " + path);
  entries_.emplace(path, Parameter{std::move(value), frozen});
}

const Parameter& ParameterSet::at(const std::string& path) const {
  auto it = entries_.find(path);
  if (it == entries_.end()) throw ConfigError("unknown parameter path: " + path);
  return it->second;
}

Parameter& ParameterSet::at(const std::string& path) {
  auto it = entries_.find(path);
  if (it == entries_.end()) throw ConfigError("unknown parameter path: " + path);
  return it->second;
}

void ParameterSet::freeze_all(bool frozen) {
  for (auto& [_, p] : entries_) p.frozen = frozen;
}

std::int64_t ParameterSet::scalar_count() const {
  std::int64_t n = 0;
  for (const auto& [_, p] : entries_) n += p.value.size();
  return n;
}

std::string parameter_digest(const ParameterSet& params) {
  Sha256 h;
  for (const auto& [path, p] : params) feed(h, path, p.value);
  return h.hex();
}

std::string tensor_digest(const std::string& path, const Tensor& value) {
  Sha256 h;
  feed(h, path, value);
  return h.hex();
}

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

Var ParamBinder::operator()(const std::string& path) {
  auto it = bound_.find(path);
  if (it != bound_.end()) return it->second;
  const Parameter& p = params_->at(path);
  const bool track = mode_ == BindMode::trainable && !p.frozen;
  Var v = tape_->leaf(p.value, track);
  bound_.emplace(path, v);
  return v;
}

Gradients ParamBinder::gradients() const {
  Gradients out;
  for (const auto& [path, p] : *params_) {
    auto it = bound_.find(path);
    if (it == bound_.end() || !it->second.requires_grad()) {
      out.emplace(path, Tensor(p.value.shape(), 0.0));
    } else {
      out.emplace(path, tape_->grad(it->second));
    }
  }
  return out;
}

void adam_step(ParameterSet& params, const Gradients& grads, AdamState& state, double lr, const AdamConfig& cfg) {
  state.steps += 1;
  const double t = static_cast<double>(state.steps);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& [path, p] : params) {
    if (p.frozen) continue;
    auto git = grads.find(path);
    if (git == grads.end()) continue;
    const Tensor& g = git->second;
    auto [mit, m_new] = state.m.try_emplace(path, p.value.shape(), 0.0);
    auto [vit, v_new] = state.v.try_emplace(path, p.value.shape(), 0.0);
    Tensor& m = mit->second;
    Tensor& v = vit->second;
    for (std::int64_t i = 0; i < p.value.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value[i] -= lr * (mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * p.value[i]);
    }
  }
}

}  // namespace dcdgan
