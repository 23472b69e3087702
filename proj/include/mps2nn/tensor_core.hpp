#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <json.hpp>

namespace mps2nn {

using cplx = std::complex<double>;

// Dense row-major tensor. shape is kept explicit so site tensors carry their
// (left bond, physical, right bond) layout.
struct DenseTensor {
  std::vector<int> shape;
  std::vector<cplx> data;

  DenseTensor() = default;
  DenseTensor(std::vector<int> shape_, std::vector<cplx> data_);

  int64_t size() const;
  // strided access for the rank-3 site layout (l, d, r)
  cplx& at3(int a, int k, int b);
  const cplx& at3(int a, int k, int b) const;
};

// Open-boundary matrix product state: sites[i] has shape (chi_{i-1}, d_i, chi_i),
// chi_0 = chi_N = 1.
struct Mps {
  std::vector<DenseTensor> sites;

  int n() const { return static_cast<int>(sites.size()); }
  int phys_dim(int i) const { return sites[i].shape[1]; }
  int left_bond(int i) const { return sites[i].shape[0]; }
  int right_bond(int i) const { return sites[i].shape[2]; }
  int max_bond() const;
  // number of basis states d_0 * d_1 * ..., or -1 on overflow past 2^62
  int64_t state_count() const;

  void validate() const;  // throws std::invalid_argument on malformed shapes
};

// computational basis state: s[i] in [0, d_i)
using BasisState = std::vector<int>;

// All basis states in lexicographic order (first site slowest). Throws if the
// space exceeds `limit` states.
std::vector<BasisState> enumerate_states(const Mps& mps, int64_t limit);
BasisState unrank_state(const Mps& mps, int64_t rank);

// Exact amplitude by sequential vector-matrix contraction, O(N d chi^2).
// When multiply_counter is given it accumulates the scalar multiply count of
// the one-hot embedding model (d*l*r per site) plus the chain products (l*r
// per site after the first), which matches plan_cost for a sequential plan.
cplx contract_exact(const Mps& mps, const BasisState& s,
                    int64_t* multiply_counter = nullptr);

// (ln|psi|, arg psi in (-pi, pi]); throws std::domain_error on psi == 0.
std::pair<double, double> log_amplitude(const Mps& mps, const BasisState& s);

// i.i.d. complex Gaussian entries, std `scale` per real component; scale <= 0
// selects the default chi^{-1/2}. Deterministic in seed. For state spaces of
// at most 2^20 the amplitudes are enumerated and generation reseeds with
// seed+1 until no state has an exactly zero real or imaginary part.
Mps random_mps(int n, int d, int chi, uint64_t seed, double scale = 0.0);

nlohmann::json mps_to_json(const Mps& mps);
Mps mps_from_json(const nlohmann::json& j);
void save_mps(const Mps& mps, const std::string& path);
Mps load_mps(const std::string& path);

double wrap_angle(double a);  // wrap to (-pi, pi]

}  // namespace mps2nn
