#pragma once

#include "prym/flow.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace prym {

// The butterfly move with index k: the renormalization carrying the closed
// saddle connection gamma_k (the vertical direction for k = kInfinity) to a
// horizontal side of the new short cylinder.  `matrix` is the classical move
// [[w, lambda], [dy, 1]]^(-1), where dy is the slope numerator of gamma_k
// (2k in genus 2, k in genus 3 and 4; the quarter turn [[0, 1], [-1, 0]] for
// the vertical move); the full derivative factors as
// derivative = normalization * matrix.  In genus 2 and 4 the composite is a
// measured affine equivalence onto the target model and `normalization` is
// upper triangular.  In genus 3 the move direction decomposes in the mirror
// of the model diagram (one long cylinder feeding two short ones), so the
// composite is the classical parameter-level renormalization instead; the
// model whose vertical diagram the cut does match affinely is recorded in
// `cut_match`.
struct ButterflyMove {
  long k = 0;
  Prototype source;
  Prototype target;
  Mat2 matrix;
  Mat2 normalization;
  std::optional<Prototype> cut_match;
};

// An affine transport between two built models: the move data plus exact
// point maps in both directions.  The maps keep both surfaces alive.
struct TransportResult {
  std::shared_ptr<const Surface> source;
  std::shared_ptr<const Surface> target;
  ButterflyMove move;
  PointMap map;      // source -> target; map.derivative is the full derivative
  PointMap inverse;  // target -> source
  // True when map/inverse are affine homeomorphisms measured from the cut
  // (genus 2 and 4).  False for the genus-3 parameter-level transport, whose
  // point maps are defined on the cone class and the distinguished
  // horizontal saddles only.
  bool affine = true;
};

// Performs the butterfly move B_k on a built model.
//
// Genus 2 and 4: decomposes the surface in the gamma_k direction (slope
// 2k/w resp. k/w; vertical for k = kInfinity), re-cuts along the new
// cylinders, and normalizes scale, shear and cell labels so the target is
// literally Surface::build of the measured parameters, which are checked
// against butterfly_params / binfty_params.
//
// Genus 3: the gamma_k-direction cut matches the vertical diagram of a
// same-discriminant model (recorded in move.cut_match, and verified), never
// the horizontal diagram of the parameter-move target, so no affine
// transport onto build(butterfly_params(p, k)) exists.  The returned
// transport carries the classical normalization (lambda_q/2) * matrix and
// point maps defined on the cone class and the distinguished horizontal
// saddle chain, where they reproduce the classical images.
//
// Throws DomainError for inadmissible k and HypothesisError when the
// direction does not decompose in the expected pattern.
TransportResult butterfly(const Surface& s, long k);

// Image of a point under the transport.  For a genus-3 transport the point
// must lie on the cone class or the distinguished horizontal saddle chain.
SurfacePoint transport_point(const TransportResult& t, const SurfacePoint& p);

// Generators of the affine elements used by the classification: horizontal
// and vertical multi-twists (any nonzero power), the Prym involution, and
// butterfly moves.
struct Generator {
  enum class Kind { HorizontalTwist, VerticalTwist, Involution, Butterfly };
  Kind kind = Kind::HorizontalTwist;
  long power = 1;  // twist exponent; ignored by the other kinds
  long k = 1;      // butterfly index, kInfinity allowed where defined
};

Generator twist_h(long power = 1);
Generator twist_v(long power = 1);
Generator involution_gen();
Generator butterfly_gen(long k);

// One step of an evaluated word: a printable generator name, its derivative,
// and the carrying model and point after applying it.
struct WordStep {
  std::string generator;
  Mat2 derivative;
  Prototype params_after;
  SurfacePoint point_after;
};

// The result of applying a word of generators (leftmost generator first) to
// a marked point of a built model.
struct WordResult {
  std::shared_ptr<const Surface> surface;
  SurfacePoint point;
  Mat2 derivative;  // composite derivative of the whole word
  std::vector<WordStep> trace;
};

WordResult word_apply(const Surface& s, const std::vector<Generator>& word,
                      const SurfacePoint& p);

}  // namespace prym
