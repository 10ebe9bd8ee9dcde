#pragma once

namespace patk {

/// Caps the number of worker threads used by internal parallel loops.
/// Values < 1 restore the runtime default.
void set_thread_count(int n);

int thread_count();

}  // namespace patk
