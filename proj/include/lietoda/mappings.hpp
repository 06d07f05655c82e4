#pragma once
// Integrable substitutions UToda(1,1), Darboux-Toda and UToda(1,2) as grid
// transforms, and the Davey-Stewartson residual with its invariance check.

#include "lietoda/lattice.hpp"

namespace lietoda {

enum class MapKind { utoda11, darboux_toda, utoda12 };
std::string map_kind_name(MapKind k);
MapKind parse_map_kind(const std::string& s);  // "utoda11" | "dt" | "utoda12"
// number of functions transformed: 2^{m1+m2-1}
int map_arity(MapKind k);

struct SingularMapping : std::runtime_error {
  std::vector<std::array<int, 2>> nodes;
  SingularMapping(const std::string& what, std::vector<std::array<int, 2>> where)
      : std::runtime_error(what), nodes(std::move(where)) {}
};

struct MappingState {
  MapKind kind = MapKind::utoda11;
  Grid2D grid;
  std::vector<Field2D> fields;  // (phi1, phi2[, phi3, phi4]) or (u, v)
  int ring = 0;                 // boundary rings without valid values
  int applications = 0;
};

MappingState make_state(MapKind k, const Grid2D& g, std::vector<Field2D> fields);

MappingState utoda11_map(const MappingState& s);
MappingState darboux_toda_map(const MappingState& s);
MappingState utoda12_map(const MappingState& s);
MappingState apply_map(const MappingState& s, int iterations = 1);

// lattice extraction at site i
MappingState utoda11_chain(const TauField& T, int i);         // (theta_i, theta_{i-1})
MappingState darboux_toda_chain(const TauField& T, int i);    // (u_i, v_i)
MappingState utoda12_chain(const TauField& T, const PFields& P, int i);  // (theta_i, theta_{i-1}, p_i, p_{i-1})

// max |a - b| over the interior valid for both states
ResidualReport compare_states(const std::string& name, const MappingState& a, const MappingState& b, double tol);

// Fields on an (x, y, t) box; t is the Davey-Stewartson time.
struct SpaceTimeField {
  Grid2D grid;
  double t0 = 0.0, ht = 0.01;
  std::vector<Field2D> slices;
  int Nt() const { return static_cast<int>(slices.size()); }
  double t(int it) const { return t0 + ht * it; }
};

struct DSResidual {
  ResidualReport local;     // w_x - (uv)_y and v_t + v_yy + 2 v w
  ResidualReport nonlocal;  // both equations with w = integral of (uv)_y in x
  ResidualReport mapped;    // local form after one Darboux-Toda map
};

// DS in the form -u_t + u_yy + 2 u w = 0, v_t + v_yy + 2 v w = 0, w_x = (uv)_y
DSResidual ds_invariance_check(const SpaceTimeField& u, const SpaceTimeField& v, double tol = 1e-4,
                               double mapped_tol = 1e-3);
ResidualReport ds_residual(const SpaceTimeField& u, const SpaceTimeField& v, double tol, bool nonlocal);

}  // namespace lietoda
