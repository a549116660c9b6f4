#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "anchorlab/tape.hpp"
#include "anchorlab/tensor.hpp"

namespace anchorlab {

/// Fully connected layer: weight (out x in) and bias (out).
struct DenseLayer {
  Parameter weight;
  Parameter bias;

  std::size_t inputs() const { return weight.value.shape.cols; }
  std::size_t outputs() const { return weight.value.shape.rows; }
};

/// Stack of dense layers with GeLU between them and a linear final layer.
class Mlp {
 public:
  Mlp() = default;
  /// `sizes` lists every width from input to output, e.g. {3, 16, 4}.
  /// Weights and biases are drawn uniformly from +-1/sqrt(fan_in).
  Mlp(std::span<const std::size_t> sizes, std::mt19937_64& rng,
      const std::string& prefix);
  explicit Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {}

  Var forward(Tape& tape, Var input);
  std::vector<double> forward(std::span<const double> input) const;

  std::vector<std::size_t> sizes() const;
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
};

/// Optional hook applied to the normalized latent before decoding.
using LatentTransform = std::function<std::vector<double>(std::span<const double>)>;

/// Result of a full pass: raw latent, normalized latent and reconstruction.
struct ForwardResult {
  std::vector<double> latent;
  std::vector<double> unit_latent;
  std::vector<double> output;
};

/// Encoder -> L2 normalization -> decoder.
class SphericalAutoencoder {
 public:
  struct Architecture {
    std::size_t input_dim = 3;
    std::size_t latent_dim = 4;
    std::vector<std::size_t> encoder_hidden{16};
    std::vector<std::size_t> decoder_hidden{16};

    bool operator==(const Architecture&) const = default;
  };

  SphericalAutoencoder() = default;
  SphericalAutoencoder(const Architecture& arch, std::mt19937_64& rng);
  SphericalAutoencoder(Mlp encoder, Mlp decoder);

  struct TapedPass {
    Var latent;
    Var unit_latent;
    Var output;
  };
  TapedPass forward(Tape& tape, std::span<const double> input);

  std::vector<double> encode(std::span<const double> input) const;
  std::vector<double> decode(std::span<const double> unit_latent) const;
  /// Evaluation pass. `transform`, when set, rewrites the unit latent.
  ForwardResult forward(std::span<const double> input,
                        const LatentTransform& transform = {}) const;

  Architecture architecture() const;
  std::size_t latent_dim() const;

  Mlp& encoder() { return encoder_; }
  Mlp& decoder() { return decoder_; }
  const Mlp& encoder() const { return encoder_; }
  const Mlp& decoder() const { return decoder_; }

  /// Every trainable tensor, encoder first, weight before bias.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void zero_grad();

 private:
  Mlp encoder_;
  Mlp decoder_;
};

}  // namespace anchorlab
