#include "mgmap/ad/tensor.hpp"

namespace mgmap::ad {

namespace {
thread_local bool g_grad_enabled = true;
bool g_finite_checks = false;
}  // namespace

bool grad_enabled() { return g_grad_enabled; }
void set_grad_enabled(bool on) { g_grad_enabled = on; }

bool finite_checks() { return g_finite_checks; }
void set_finite_checks(bool on) { g_finite_checks = on; }

}  // namespace mgmap::ad
