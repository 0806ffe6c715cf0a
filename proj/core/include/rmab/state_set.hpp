#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace rmab {

/// Subset of the state indices 0..n-1 of an approximate space. Used both for
/// the priority set Omega of an Omega-priority policy and for passive sets.
class StateSet {
 public:
  StateSet() = default;
  explicit StateSet(std::size_t universe) : member_(universe, 0) {}

  static StateSet empty(std::size_t universe) { return StateSet(universe); }
  static StateSet full(std::size_t universe) {
    StateSet s(universe);
    for (auto& m : s.member_) m = 1;
    s.count_ = universe;
    return s;
  }
  static StateSet of(std::size_t universe, std::initializer_list<std::size_t> items) {
    StateSet s(universe);
    for (auto i : items) s.insert(i);
    return s;
  }

  std::size_t universe() const { return member_.size(); }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  bool contains(std::size_t i) const { return member_[i] != 0; }

  void insert(std::size_t i) {
    if (!member_.at(i)) {
      member_[i] = 1;
      ++count_;
    }
  }
  void erase(std::size_t i) {
    if (member_.at(i)) {
      member_[i] = 0;
      --count_;
    }
  }

  StateSet complement() const {
    StateSet c(universe());
    for (std::size_t i = 0; i < member_.size(); ++i) {
      if (!member_[i]) c.insert(i);
    }
    return c;
  }

  bool is_subset_of(const StateSet& other) const {
    for (std::size_t i = 0; i < member_.size(); ++i) {
      if (member_[i] && !other.member_[i]) return false;
    }
    return true;
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    out.reserve(count_);
    for (std::size_t i = 0; i < member_.size(); ++i) {
      if (member_[i]) out.push_back(i);
    }
    return out;
  }

  friend bool operator==(const StateSet&, const StateSet&) = default;

 private:
  std::vector<unsigned char> member_;
  std::size_t count_ = 0;
};

}  // namespace rmab
