#pragma once

#include "cgfem/mesh.hpp"

namespace cgfem {

struct ValueGrad {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
};

/// Bilinear hat function of the element corner `corner` (0..3) at p.
ValueGrad hat_corner(int corner, const ElementPoint& p);

/// Hat function N_i at p; exactly zero when p's element is not in the patch of i.
ValueGrad hat_eval(const Mesh& mesh, int i, const ElementPoint& p);

/// Flat-top parameters: sigma in [0, 0.5), exponent l >= 1.
struct FlatTopParams {
  double sigma = 0.2;
  int l = 1;
};

void validate(const FlatTopParams& params);

struct FlatTop1D {
  double left, right, d_left, d_right;
};

/// 1D reference pair on [-1,1]: left = 1 on [-1,-1+2 sigma], (1 - t^l)^l on the
/// middle stretch with t = (xi+1-2 sigma)/(2(1-2 sigma)), 0 beyond; right = 1 - left.
FlatTop1D flat_top_1d_eval(double xi, const FlatTopParams& params);

ValueGrad flat_top_corner(int corner, const ElementPoint& p, const FlatTopParams& params);
ValueGrad flat_top_eval(const Mesh& mesh, int i, const ElementPoint& p, const FlatTopParams& params);

}  // namespace cgfem
