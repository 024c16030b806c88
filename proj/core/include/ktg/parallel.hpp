#pragma once

#include <Eigen/Dense>

#include <functional>

namespace ktg {

// Number of workers used when a caller passes workers <= 0.
int default_workers();

// Process-wide override for the default worker count (0 restores machine
// parallelism).  Used by the CLI --workers flag.
void set_default_workers(int workers);

// Evaluates fn(0..count-1), possibly concurrently.  Callers own output
// placement (write into a preallocated slot per index) and perform any
// reduction sequentially afterwards, so results never depend on the worker
// count or on scheduling.
void parallel_for(Eigen::Index count, const std::function<void(Eigen::Index)>& fn,
                  int workers = 0);

}  // namespace ktg
