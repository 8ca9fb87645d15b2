#pragma once

#include "sublin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace sublin {

/**
 * Finite sample space: an ordered list of distinct atom labels.
 *
 * Every subset of atoms is an event, so the measurable structure is the
 * power set. Spaces are shared through `SpacePtr`; two objects are
 * compatible when their spaces have identical atom lists.
 */
class SampleSpace {
public:
    explicit SampleSpace(std::vector<std::string> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw ModelError("sample space needs at least one atom");
        std::unordered_set<std::string> seen;
        for (const auto& a : atoms_) {
            if (!seen.insert(a).second) throw ModelError("duplicate atom label '" + a + "'");
        }
    }

    std::size_t size() const noexcept { return atoms_.size(); }
    const std::string& label(std::size_t i) const { return atoms_.at(i); }
    const std::vector<std::string>& labels() const noexcept { return atoms_; }

    std::size_t index_of(const std::string& label) const {
        auto it = std::find(atoms_.begin(), atoms_.end(), label);
        if (it == atoms_.end()) throw ModelError("unknown atom '" + label + "'");
        return static_cast<std::size_t>(it - atoms_.begin());
    }

    friend bool operator==(const SampleSpace& a, const SampleSpace& b) { return a.atoms_ == b.atoms_; }

private:
    std::vector<std::string> atoms_;
};

using SpacePtr = std::shared_ptr<const SampleSpace>;

inline SpacePtr make_space(std::vector<std::string> atoms) {
    return std::make_shared<const SampleSpace>(std::move(atoms));
}

/// Space with atoms "0", "1", ..., "k-1".
inline SpacePtr make_indexed_space(std::size_t k) {
    std::vector<std::string> atoms;
    atoms.reserve(k);
    for (std::size_t i = 0; i < k; ++i) atoms.push_back(std::to_string(i));
    return make_space(std::move(atoms));
}

inline bool same_space(const SpacePtr& a, const SpacePtr& b) {
    return a == b || (a && b && *a == *b);
}

inline void require_same_space(const SpacePtr& a, const SpacePtr& b) {
    if (!same_space(a, b)) throw SpaceMismatch();
}

/// Subset of atoms of a sample space.
class Event {
public:
    Event(SpacePtr space, std::vector<bool> mask) : space_(std::move(space)), mask_(std::move(mask)) {
        if (!space_) throw ModelError("event without a sample space");
        if (mask_.size() != space_->size()) throw ModelError("event mask length differs from atom count");
    }

    static Event empty(const SpacePtr& space) { return Event(space, std::vector<bool>(space->size(), false)); }
    static Event full(const SpacePtr& space) { return Event(space, std::vector<bool>(space->size(), true)); }

    static Event of(const SpacePtr& space, std::initializer_list<std::size_t> members) {
        return of(space, std::vector<std::size_t>(members));
    }
    static Event of(const SpacePtr& space, const std::vector<std::size_t>& members) {
        std::vector<bool> mask(space->size(), false);
        for (auto m : members) {
            if (m >= mask.size()) throw ModelError("event member index out of range");
            mask[m] = true;
        }
        return Event(space, std::move(mask));
    }

    const SpacePtr& space() const noexcept { return space_; }
    bool contains(std::size_t atom) const { return mask_.at(atom); }
    const std::vector<bool>& mask() const noexcept { return mask_; }

    std::size_t count() const { return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true)); }
    bool is_empty() const { return count() == 0; }

    std::vector<std::size_t> members() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < mask_.size(); ++i)
            if (mask_[i]) out.push_back(i);
        return out;
    }

    Event complement() const {
        auto m = mask_;
        m.flip();
        return Event(space_, std::move(m));
    }

    Event operator|(const Event& o) const { return combine(o, [](bool a, bool b) { return a || b; }); }
    Event operator&(const Event& o) const { return combine(o, [](bool a, bool b) { return a && b; }); }

    bool subset_of(const Event& o) const {
        require_same_space(space_, o.space_);
        for (std::size_t i = 0; i < mask_.size(); ++i)
            if (mask_[i] && !o.mask_[i]) return false;
        return true;
    }

    friend bool operator==(const Event& a, const Event& b) {
        return same_space(a.space_, b.space_) && a.mask_ == b.mask_;
    }

private:
    template <class Op>
    Event combine(const Event& o, Op op) const {
        require_same_space(space_, o.space_);
        std::vector<bool> m(mask_.size());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = op(mask_[i], o.mask_[i]);
        return Event(space_, std::move(m));
    }

    SpacePtr space_;
    std::vector<bool> mask_;
};

/// Real-valued function on the atoms of a finite space.
class RandomVariable {
public:
    RandomVariable(SpacePtr space, std::vector<double> values)
        : space_(std::move(space)), values_(std::move(values)) {
        if (!space_) throw ModelError("random variable without a sample space");
        if (values_.size() != space_->size())
            throw ModelError("random variable has " + std::to_string(values_.size()) + " values for " +
                             std::to_string(space_->size()) + " atoms");
        for (double v : values_)
            if (!std::isfinite(v)) throw ModelError("random variable values must be finite");
    }

    static RandomVariable constant(const SpacePtr& space, double c) {
        return RandomVariable(space, std::vector<double>(space->size(), c));
    }
    static RandomVariable indicator(const Event& e) {
        std::vector<double> v(e.space()->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = e.contains(i) ? 1.0 : 0.0;
        return RandomVariable(e.space(), std::move(v));
    }

    const SpacePtr& space() const noexcept { return space_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t atom) const { return values_[atom]; }
    std::size_t size() const noexcept { return values_.size(); }

    double sup_norm() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }
    bool is_constant() const {
        return std::all_of(values_.begin(), values_.end(), [&](double v) { return v == values_.front(); });
    }

    /// Pointwise map.
    template <class F>
    RandomVariable map(F f) const {
        std::vector<double> out(values_.size());
        std::transform(values_.begin(), values_.end(), out.begin(), f);
        return RandomVariable(space_, std::move(out));
    }

    /// Atoms where `pred(value)` holds.
    template <class Pred>
    Event where(Pred pred) const {
        std::vector<bool> mask(values_.size());
        for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = pred(values_[i]);
        return Event(space_, std::move(mask));
    }

    RandomVariable operator-() const { return map([](double v) { return -v; }); }
    RandomVariable operator+(double c) const { return map([c](double v) { return v + c; }); }
    RandomVariable operator-(double c) const { return map([c](double v) { return v - c; }); }
    RandomVariable operator*(double c) const { return map([c](double v) { return v * c; }); }
    friend RandomVariable operator*(double c, const RandomVariable& x) { return x * c; }

    RandomVariable operator+(const RandomVariable& o) const { return zip(o, std::plus<>{}); }
    RandomVariable operator-(const RandomVariable& o) const { return zip(o, std::minus<>{}); }
    RandomVariable operator*(const RandomVariable& o) const { return zip(o, std::multiplies<>{}); }

    RandomVariable abs() const { return map([](double v) { return std::abs(v); }); }
    RandomVariable pow(double p) const { return map([p](double v) { return std::pow(v, p); }); }

    bool operator>=(const RandomVariable& o) const {
        require_same_space(space_, o.space_);
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (values_[i] < o.values_[i]) return false;
        return true;
    }

private:
    template <class Op>
    RandomVariable zip(const RandomVariable& o, Op op) const {
        require_same_space(space_, o.space_);
        std::vector<double> out(values_.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(values_[i], o.values_[i]);
        return RandomVariable(space_, std::move(out));
    }

    SpacePtr space_;
    std::vector<double> values_;
};

}  // namespace sublin
