#pragma once

#include <string>

#include "muskat/surface.hpp"

namespace muskat {

struct Snapshot {
  SurfaceState state;
  double t = 0;
};

// Header line "MUSKAT3D v1 n=<n> L=<L> t=<t>\n" followed by n^2 records of
// three little-endian float64 (U1, U2, U3) in node order.
std::string encode_snapshot(const SurfaceState& s, double t);
Snapshot decode_snapshot(const std::string& bytes);

void save_snapshot(const std::string& path, const SurfaceState& s, double t);
Snapshot load_snapshot(const std::string& path);

}  // namespace muskat
