#include "beamsparse/selection.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace beamsparse {

std::vector<int> SelectionVector::support() const {
  std::vector<int> idx;
  idx.reserve(K_s);
  for (int i = 0; i < delta.size(); ++i)
    if (delta(i) != 0) idx.push_back(i);
  return idx;
}

int SelectionVector::hamming_distance(const SelectionVector& other) const {
  if (delta.size() != other.delta.size())
    throw std::invalid_argument("hamming_distance: length mismatch");
  int d = 0;
  for (int i = 0; i < delta.size(); ++i) d += (delta(i) != other.delta(i)) ? 1 : 0;
  return d;
}

void SelectionVector::validate() const {
  int ones = 0;
  for (int i = 0; i < delta.size(); ++i) {
    if (delta(i) != 0 && delta(i) != 1)
      throw std::invalid_argument("SelectionVector: entries must be 0 or 1");
    ones += delta(i);
  }
  if (ones != K_s)
    throw std::invalid_argument("SelectionVector: popcount must equal K_s");
}

SelectionVector SelectionVector::from_support(int m, const std::vector<int>& support) {
  SelectionVector s;
  s.delta = IVec::Zero(m);
  s.K_s = static_cast<int>(support.size());
  for (int i : support) {
    if (i < 0 || i >= m) throw std::invalid_argument("SelectionVector: index out of range");
    s.delta(i) = 1;
  }
  s.validate();  // also rejects duplicate indices
  return s;
}

SelectionVector SelectionVector::all_active(int m) {
  SelectionVector s;
  s.delta = IVec::Ones(m);
  s.K_s = m;
  return s;
}

namespace {

std::vector<int> sorted_indices(const RVec& values, int k, bool largest) {
  const int m = static_cast<int>(values.size());
  if (k < 0 || k > m) throw std::invalid_argument("selection: k out of range");
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (largest) return values(a) > values(b);
    return values(a) < values(b);
  });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

SelectionVector select_beams(const RVec& cost, int k_s) {
  return SelectionVector::from_support(static_cast<int>(cost.size()),
                                       sorted_indices(cost, k_s, /*largest=*/false));
}

std::vector<int> largest_indices(const RVec& values, int k_s) {
  return sorted_indices(values, k_s, /*largest=*/true);
}

}  // namespace beamsparse
