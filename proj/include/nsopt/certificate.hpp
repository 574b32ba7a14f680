#pragma once

#include <vector>

#include "nsopt/core.hpp"

namespace nsopt {

struct CertificateProbe {
  Vector point;
  double weight = 0.0;
  Vector subgrad;
};

/// A checkable member of the Goldstein delta-subdifferential at `center`:
/// aggregate = sum weight * subgrad over probes lying in the delta-ball.
struct Certificate {
  Vector center;
  double delta = 0.0;
  std::vector<CertificateProbe> probes;
  Vector aggregate;
  double norm = 0.0;
};

/// Recomputes aggregate and norm from the probes.
void refresh_aggregate(Certificate& cert);

}  // namespace nsopt
