#pragma once

#include <compare>
#include <span>
#include <string>
#include <vector>

namespace netfx {

/// Maps a covariate vector of non-negative integer codes to a single symbol
/// with mixed-radix encoding. The zero vector always encodes to 0, and for
/// width 1 the symbol equals the code itself.
class CovariateCodec {
 public:
  CovariateCodec() = default;
  explicit CovariateCodec(std::vector<int> radices);

  int width() const noexcept { return static_cast<int>(radices_.size()); }
  const std::vector<int>& radices() const noexcept { return radices_; }

  int encode(std::span<const int> components) const;
  std::vector<int> decode(int symbol) const;

 private:
  std::vector<int> radices_;
};

/// A stratum condition on a history prefix, stored as the interleaved step
/// sequence z1, x1, z2, x2, ... (covariates as codec symbols).
///
/// An odd number of steps ends with a treatment z_t, t = (size + 1) / 2; an
/// even non-zero number ends with a covariate x_t, t = size / 2. The empty key
/// is the whole sample.
struct StratumKey {
  std::vector<int> steps;

  auto operator<=>(const StratumKey&) const = default;

  std::size_t size() const noexcept { return steps.size(); }
  bool empty() const noexcept { return steps.empty(); }
  bool ends_with_treatment() const noexcept { return steps.size() % 2 == 1; }
  /// Time index of the last step (0 for the whole sample).
  int time() const noexcept { return static_cast<int>((steps.size() + 1) / 2); }

  int treatment(int t) const { return steps.at(static_cast<std::size_t>(2 * (t - 1))); }
  int covariate(int t) const { return steps.at(static_cast<std::size_t>(2 * t - 1)); }

  StratumKey parent() const;
  StratumKey child(int symbol) const;
  bool refines(const StratumKey& coarser) const;
};

/// Human-readable form, e.g. "z1=1,x1=0,z2=1" or "x1=(1,0)" for vector
/// covariates. The whole sample renders as "*".
std::string format_key(const StratumKey& key, const CovariateCodec& codec);

}  // namespace netfx
