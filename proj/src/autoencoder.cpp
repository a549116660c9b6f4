#include "anchorlab/autoencoder.hpp"

#include <cmath>
#include <string>

#include "anchorlab/rng.hpp"

namespace anchorlab {

Mlp::Mlp(std::span<const std::size_t> sizes, std::mt19937_64& rng,
         const std::string& prefix) {
  if (sizes.size() < 2) throw ShapeError("mlp needs at least input and output sizes");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const std::size_t in = sizes[i];
    const std::size_t out = sizes[i + 1];
    if (in == 0 || out == 0) throw ShapeError("mlp layer sizes must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Tensor w(out, in);
    for (double& x : w.values) x = uniform(rng, -bound, bound);
    Tensor b = Tensor::vector(out);
    for (double& x : b.values) x = uniform(rng, -bound, bound);
    const std::string name = prefix + "." + std::to_string(i);
    layers_.push_back(DenseLayer{Parameter(name + ".weight", std::move(w)),
                                 Parameter(name + ".bias", std::move(b))});
  }
}

Var Mlp::forward(Tape& tape, Var input) {
  Var h = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = tape.linear(h, tape.parameter(layers_[i].weight),
                    tape.parameter(layers_[i].bias));
    if (i + 1 < layers_.size()) h = tape.gelu(h);
  }
  return h;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  std::vector<double> h(input.begin(), input.end());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = affine(layers_[i].weight.value, h, layers_[i].bias.value.values);
    if (i + 1 < layers_.size()) {
      for (double& x : h) x = gelu(x);
    }
  }
  return h;
}

std::vector<std::size_t> Mlp::sizes() const {
  std::vector<std::size_t> s;
  if (layers_.empty()) return s;
  s.push_back(layers_.front().inputs());
  for (const auto& l : layers_) s.push_back(l.outputs());
  return s;
}

namespace {

std::vector<std::size_t> widths(std::size_t in, const std::vector<std::size_t>& hidden,
                                std::size_t out) {
  std::vector<std::size_t> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

}  // namespace

SphericalAutoencoder::SphericalAutoencoder(const Architecture& arch,
                                           std::mt19937_64& rng)
    : encoder_(widths(arch.input_dim, arch.encoder_hidden, arch.latent_dim), rng,
               "encoder"),
      decoder_(widths(arch.latent_dim, arch.decoder_hidden, arch.input_dim), rng,
               "decoder") {}

SphericalAutoencoder::SphericalAutoencoder(Mlp encoder, Mlp decoder)
    : encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
  const auto es = encoder_.sizes();
  const auto ds = decoder_.sizes();
  if (es.empty() || ds.empty() || es.back() != ds.front() ||
      es.front() != ds.back()) {
    throw ShapeError("encoder and decoder widths do not line up");
  }
}

SphericalAutoencoder::TapedPass SphericalAutoencoder::forward(
    Tape& tape, std::span<const double> input) {
  Var x = tape.constant(std::vector<double>(input.begin(), input.end()));
  Var z = encoder_.forward(tape, x);
  Var zhat = tape.l2_normalize(z);
  Var y = decoder_.forward(tape, zhat);
  return {z, zhat, y};
}

std::vector<double> SphericalAutoencoder::encode(std::span<const double> input) const {
  return encoder_.forward(input);
}

std::vector<double> SphericalAutoencoder::decode(
    std::span<const double> unit_latent) const {
  return decoder_.forward(unit_latent);
}

ForwardResult SphericalAutoencoder::forward(std::span<const double> input,
                                            const LatentTransform& transform) const {
  ForwardResult r;
  r.latent = encode(input);
  r.unit_latent = l2_normalized(r.latent);
  r.output = transform ? decode(transform(r.unit_latent)) : decode(r.unit_latent);
  return r;
}

SphericalAutoencoder::Architecture SphericalAutoencoder::architecture() const {
  Architecture a;
  const auto es = encoder_.sizes();
  const auto ds = decoder_.sizes();
  a.input_dim = es.front();
  a.latent_dim = es.back();
  a.encoder_hidden.assign(es.begin() + 1, es.end() - 1);
  a.decoder_hidden.assign(ds.begin() + 1, ds.end() - 1);
  return a;
}

std::size_t SphericalAutoencoder::latent_dim() const {
  return encoder_.layers().back().outputs();
}

std::vector<Parameter*> SphericalAutoencoder::parameters() {
  std::vector<Parameter*> ps;
  for (Mlp* m : {&encoder_, &decoder_}) {
    for (auto& l : m->layers()) {
      ps.push_back(&l.weight);
      ps.push_back(&l.bias);
    }
  }
  return ps;
}

std::vector<const Parameter*> SphericalAutoencoder::parameters() const {
  std::vector<const Parameter*> ps;
  for (const Mlp* m : {&encoder_, &decoder_}) {
    for (const auto& l : m->layers()) {
      ps.push_back(&l.weight);
      ps.push_back(&l.bias);
    }
  }
  return ps;
}

void SphericalAutoencoder::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

}  // namespace anchorlab
