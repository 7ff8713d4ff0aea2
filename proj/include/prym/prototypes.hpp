#pragma once

#include <optional>
#include <vector>

#include "prym/qfield.hpp"

namespace prym {

// Combinatorial model data for a Prym eigenform prototype.  Genus selects the
// polygon family (2: L-shape, 3: S-shape, 4: X-shape) and the quadratic
// relation satisfied by lambda.
struct Prototype {
  int genus = 2;
  long w = 1, h = 1, t = 0, e = 0;

  friend bool operator==(const Prototype& x, const Prototype& y) = default;
  friend auto operator<=>(const Prototype& x, const Prototype& y) = default;
};

// lambda^2 = e*lambda + c*w*h with c = 2 in genus 3 and c = 1 otherwise.
long lambda_coupling(int genus);
long discriminant_of(const Prototype& p);
long discriminant_of(int genus, long w, long h, long e);
QuadNum lambda_of(const Prototype& p);

bool is_valid(const Prototype& p);
// Throws ExcludedDiscriminantError for (genus 3, D = 8) and (genus 4, D = 5),
// whose loci fall outside the prototype normal forms.
void check_not_excluded(int genus, long D);

std::vector<Prototype> representatives_g2(long D);
std::vector<Prototype> enumerate_for_discriminant(int genus, long D);

inline constexpr long kInfinity = -1;  // butterfly index for the vertical move

bool is_admissible(const Prototype& p, long k);

struct GoodnessReport {
  std::optional<long> q;          // good butterfly index, genus 3/4 only
  std::vector<long> admissible_ks;  // finite admissible indices, ascending
};
GoodnessReport is_good(const Prototype& p);

Prototype butterfly_params(const Prototype& p, long q);
Prototype binfty_params(const Prototype& p);
bool verify_no_tilt(const Prototype& p, long q);

// Admissible discriminants for the searches: genus 3 needs D = 0,1,4 (mod 8),
// nonsquare, with reporting threshold 17; genus 4 needs D = 0,1 (mod 4),
// nonsquare, D >= 5.
bool discriminant_admissible(int genus, long D);
long goodness_threshold(int genus);  // 17 for genus 3, 5 for genus 4

struct GoodEntry {
  long w = 0, e = 0, q = 0;
};
struct DiscriminantReport {
  long D = 0;
  bool below_threshold = false;
  std::vector<GoodEntry> good;
};
std::vector<DiscriminantReport> search_good(int genus, long d_min, long d_max);

struct TableRow {
  long e = 0, w = 0, q = 0;
};
TableRow table_row(int genus, long D);

const std::vector<long>& bad_set(int genus);  // P_bad (genus 3), S4_bad (genus 4)

}  // namespace prym
