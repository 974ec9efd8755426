#pragma once

namespace mapfsel {

// Selects between the OpenMP kernels and their serial reference versions.
// Both paths produce bit-identical results.
enum class Execution { serial, parallel };

// Number of OpenMP threads the parallel kernels will use.
int max_threads();
void set_threads(int n);

}  // namespace mapfsel
