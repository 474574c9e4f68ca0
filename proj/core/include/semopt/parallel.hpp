#pragma once

namespace semopt {

/// Number of worker threads used by element loops. Results do not depend on
/// it: every reduction runs in a fixed order.
int num_threads();
/// n <= 0 restores the machine default.
void set_num_threads(int n);

}  // namespace semopt
