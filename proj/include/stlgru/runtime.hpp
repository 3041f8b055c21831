#pragma once

namespace stlgru {

/// Keeps freed tape memory in-process between training steps. Tapes allocate
/// and release the same large blocks every step; without this glibc returns
/// them to the OS and page-faults them back in. No-op on other allocators.
void tune_allocator();

} // namespace stlgru
