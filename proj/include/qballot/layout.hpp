#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qballot/errors.hpp"

namespace qballot {

inline constexpr std::size_t kDefaultDimLimit = std::size_t{1} << 24;

// A bosonic spatial mode truncated at `cutoff` particles.
struct Mode {
  std::string label;
  int cutoff = 0;

  friend bool operator==(const Mode&, const Mode&) = default;
};

// One basis vector of a layout: an occupation per mode and a spin in {-1, 0, +1} per qutrit.
struct BasisState {
  std::vector<int> occupations;
  std::vector<int> spins;

  friend bool operator==(const BasisState&, const BasisState&) = default;
};

/// Subsystem structure of a state: bosonic modes followed by qutrits.
///
/// Subsystems are ordered [modes..., qutrits...] as declared. The basis index is
/// row-major over that order, so the last subsystem varies fastest. A mode contributes
/// the digit n in [0, cutoff]; a qutrit with spin s contributes the digit s + 1.
/// This ordering is part of the serialized state format.
class ModeLayout {
 public:
  explicit ModeLayout(std::vector<Mode> modes, std::vector<std::string> qutrits = {},
                      std::size_t dim_limit = kDefaultDimLimit)
      : modes_(std::move(modes)), qutrits_(std::move(qutrits)) {
    if (modes_.empty() && qutrits_.empty()) throw LayoutError("layout has no sites");
    std::vector<std::string_view> seen;
    auto claim = [&](std::string_view label) {
      if (label.empty()) throw LayoutError("empty site label");
      for (auto s : seen)
        if (s == label) throw LayoutError("duplicate site label '" + std::string(label) + "'");
      seen.push_back(label);
    };
    for (const auto& m : modes_) {
      claim(m.label);
      if (m.cutoff < 0) throw CutoffError("negative cutoff on mode '" + m.label + "'");
      dims_.push_back(static_cast<std::size_t>(m.cutoff) + 1);
    }
    for (const auto& q : qutrits_) {
      claim(q);
      dims_.push_back(3);
    }
    dim_ = 1;
    for (auto d : dims_) {
      if (dim_ > dim_limit / d)
        throw CutoffError("Hilbert dimension exceeds limit of " + std::to_string(dim_limit));
      dim_ *= d;
    }
    strides_.assign(dims_.size(), 1);
    for (std::size_t i = dims_.size(); i-- > 1;) strides_[i - 1] = strides_[i] * dims_[i];
  }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Mode>& modes() const noexcept { return modes_; }
  const std::vector<std::string>& qutrits() const noexcept { return qutrits_; }
  std::size_t subsystem_count() const noexcept { return dims_.size(); }
  std::size_t local_dim(std::size_t sub) const { return dims_.at(sub); }
  std::size_t stride(std::size_t sub) const { return strides_.at(sub); }
  bool is_mode(std::size_t sub) const noexcept { return sub < modes_.size(); }

  const std::string& label(std::size_t sub) const {
    return is_mode(sub) ? modes_.at(sub).label : qutrits_.at(sub - modes_.size());
  }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (std::size_t s = 0; s < subsystem_count(); ++s) out.push_back(label(s));
    return out;
  }

  std::optional<std::size_t> find(std::string_view label) const {
    for (std::size_t s = 0; s < subsystem_count(); ++s)
      if (this->label(s) == label) return s;
    return std::nullopt;
  }

  std::size_t subsystem(std::string_view label) const {
    if (auto s = find(label)) return *s;
    throw LayoutError("unknown site '" + std::string(label) + "'");
  }

  std::size_t mode_subsystem(std::string_view label) const {
    auto s = subsystem(label);
    if (!is_mode(s)) throw LayoutError("site '" + std::string(label) + "' is not a bosonic mode");
    return s;
  }

  std::size_t qutrit_subsystem(std::string_view label) const {
    auto s = subsystem(label);
    if (is_mode(s)) throw LayoutError("site '" + std::string(label) + "' is not a qutrit");
    return s;
  }

  // Digit of subsystem `sub` within basis index `index`.
  std::size_t digit(std::size_t index, std::size_t sub) const noexcept {
    return (index / strides_[sub]) % dims_[sub];
  }

  // Occupation (modes) or spin (qutrits) of subsystem `sub` at `index`.
  int value(std::size_t index, std::size_t sub) const noexcept {
    auto d = static_cast<int>(digit(index, sub));
    return is_mode(sub) ? d : d - 1;
  }

  std::size_t index_of(const BasisState& b) const {
    if (b.occupations.size() != modes_.size() || b.spins.size() != qutrits_.size())
      throw LayoutError("basis state does not match layout shape");
    std::size_t index = 0;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      int n = b.occupations[i];
      if (n < 0 || n > modes_[i].cutoff)
        throw CutoffError("occupation " + std::to_string(n) + " outside cutoff " +
                          std::to_string(modes_[i].cutoff) + " of mode '" + modes_[i].label + "'");
      index += static_cast<std::size_t>(n) * strides_[i];
    }
    for (std::size_t j = 0; j < qutrits_.size(); ++j) {
      int s = b.spins[j];
      if (s < -1 || s > 1)
        throw CutoffError("spin " + std::to_string(s) + " outside {-1,0,1} on qutrit '" +
                          qutrits_[j] + "'");
      index += static_cast<std::size_t>(s + 1) * strides_[modes_.size() + j];
    }
    return index;
  }

  BasisState basis_state(std::size_t index) const {
    if (index >= dim_) throw LayoutError("basis index out of range");
    BasisState b;
    for (std::size_t i = 0; i < modes_.size(); ++i) b.occupations.push_back(value(index, i));
    for (std::size_t j = 0; j < qutrits_.size(); ++j)
      b.spins.push_back(value(index, modes_.size() + j));
    return b;
  }

  // Sites named in `keep`, in layout order.
  ModeLayout sub_layout(const std::vector<std::string>& keep) const {
    std::vector<Mode> modes;
    std::vector<std::string> qutrits;
    for (const auto& l : keep) subsystem(l);
    for (std::size_t s = 0; s < subsystem_count(); ++s) {
      bool kept = false;
      for (const auto& l : keep) kept = kept || l == label(s);
      if (!kept) continue;
      if (is_mode(s))
        modes.push_back(modes_[s]);
      else
        qutrits.push_back(label(s));
    }
    return ModeLayout(std::move(modes), std::move(qutrits), std::numeric_limits<std::size_t>::max());
  }

  ModeLayout relabeled(std::string_view from, std::string to) const {
    auto copy = *this;
    auto s = subsystem(from);
    if (copy.find(to)) throw LayoutError("site '" + to + "' already exists");
    if (is_mode(s))
      copy.modes_[s].label = std::move(to);
    else
      copy.qutrits_[s - modes_.size()] = std::move(to);
    return copy;
  }

  friend bool operator==(const ModeLayout& a, const ModeLayout& b) {
    return a.modes_ == b.modes_ && a.qutrits_ == b.qutrits_;
  }

 private:
  std::vector<Mode> modes_;
  std::vector<std::string> qutrits_;
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  std::size_t dim_ = 1;
};

}  // namespace qballot
