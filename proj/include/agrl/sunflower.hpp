#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "agrl/policy.hpp"
#include "agrl/types.hpp"

namespace agrl {

// (K, D) certificate: a core policy set and one petal state set per member of
// the class the certificate is about.
struct SunflowerCert {
  PolicyClass core;
  std::vector<std::vector<StateId>> petals;  // petals[i] = S_pi of member i
  int k = 0;
  int d = 0;
};

// A failed petal check, reported as the offending partial trajectory.
struct PetalViolation {
  std::vector<std::pair<StateId, int>> partial;  // (state, action) pairs
};

struct PetalVerdict {
  bool ok = true;
  std::optional<PetalViolation> violation;
};

// Exhaustively checks that `policy` is an s_pi-petal on `core`: every partial
// trajectory consistent with the policy (all state tuples over consecutive
// layers, span at most max_span) must either be consistent with some core
// member or contain a state of s_pi strictly after its first index. Returns
// the first violation in (start layer, span, state tuple) order.
PetalVerdict verify_petal(const Policy& policy, const PolicyClass& core,
                          const std::vector<StateId>& s_pi, int max_span);

struct CertVerdict {
  bool ok = true;
  int failing_member = -1;
  std::optional<PetalViolation> violation;
};

// Applies verify_petal to every member of the class.
CertVerdict verify_cert(const PolicyClass& pc, const SunflowerCert& cert,
                        int max_span);

// Constructive certificate for a structurally tagged class. Throws for
// untagged/explicit classes.
SunflowerCert build_cert(const PolicyClass& pc);

// --- text format -------------------------------------------------------------

void write_cert(std::ostream& os, const SunflowerCert& cert);
SunflowerCert read_cert(std::istream& is);
void save_cert(const std::string& path, const SunflowerCert& cert);
SunflowerCert load_cert(const std::string& path);

}  // namespace agrl
