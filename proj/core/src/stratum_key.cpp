#include "netfx/stratum_key.hpp"

#include <algorithm>
#include <limits>

#include "netfx/errors.hpp"

namespace netfx {

CovariateCodec::CovariateCodec(std::vector<int> radices) : radices_(std::move(radices)) {
  long long capacity = 1;
  for (int r : radices_) {
    if (r < 1) throw UsageError("covariate radix must be positive");
    capacity *= r;
    if (capacity > std::numeric_limits<int>::max()) {
      throw DomainError("covariate alphabet too large to encode as a single symbol");
    }
  }
}

int CovariateCodec::encode(std::span<const int> components) const {
  if (static_cast<int>(components.size()) != width()) {
    throw UsageError("covariate vector has width " + std::to_string(components.size()) + ", expected " +
                     std::to_string(width()));
  }
  int symbol = 0;
  int scale = 1;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i] < 0 || components[i] >= radices_[i]) {
      throw DomainError("covariate component " + std::to_string(i + 1) + " value " +
                        std::to_string(components[i]) + " outside codec range");
    }
    symbol += components[i] * scale;
    scale *= radices_[i];
  }
  return symbol;
}

std::vector<int> CovariateCodec::decode(int symbol) const {
  std::vector<int> out(radices_.size());
  for (std::size_t i = 0; i < radices_.size(); ++i) {
    out[i] = symbol % radices_[i];
    symbol /= radices_[i];
  }
  return out;
}

StratumKey StratumKey::parent() const {
  if (steps.empty()) throw UsageError("whole-sample key has no parent");
  return StratumKey{std::vector<int>(steps.begin(), steps.end() - 1)};
}

StratumKey StratumKey::child(int symbol) const {
  StratumKey out{steps};
  out.steps.push_back(symbol);
  return out;
}

bool StratumKey::refines(const StratumKey& coarser) const {
  return coarser.steps.size() <= steps.size() &&
         std::equal(coarser.steps.begin(), coarser.steps.end(), steps.begin());
}

std::string format_key(const StratumKey& key, const CovariateCodec& codec) {
  if (key.empty()) return "*";
  std::string out;
  for (std::size_t i = 0; i < key.steps.size(); ++i) {
    if (i) out += ',';
    const int t = static_cast<int>(i / 2) + 1;
    if (i % 2 == 0) {
      out += "z" + std::to_string(t) + "=" + std::to_string(key.steps[i]);
      continue;
    }
    out += "x" + std::to_string(t) + "=";
    if (codec.width() == 1) {
      out += std::to_string(key.steps[i]);
    } else {
      const auto comps = codec.decode(key.steps[i]);
      out += '(';
      for (std::size_t c = 0; c < comps.size(); ++c) {
        if (c) out += ',';
        out += std::to_string(comps[c]);
      }
      out += ')';
    }
  }
  return out;
}

}  // namespace netfx
