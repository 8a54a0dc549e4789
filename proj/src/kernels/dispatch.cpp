#include "backends.hpp"

#include <cstdlib>
#include <string>

namespace dn::kernels {
namespace {

const Ops* widest_available() {
    if (const Ops* ops = avx2_backend()) return ops;
    if (const Ops* ops = neon_backend()) return ops;
    return &scalar_ops();
}

const Ops* by_name(std::string_view name) {
    if (name == "auto") return widest_available();
    if (name == "scalar") return &scalar_ops();
    if (name == "avx2") return avx2_backend();
    if (name == "neon") return neon_backend();
    return nullptr;
}

const Ops*& active_slot() {
    static const Ops* slot = [] {
        if (const char* env = std::getenv("DN_KERNELS")) {
            if (const Ops* ops = by_name(env)) return ops;
        }
        return widest_available();
    }();
    return slot;
}

} // namespace

std::vector<const Ops*> available() {
    std::vector<const Ops*> out{&scalar_ops()};
    if (const Ops* ops = avx2_backend()) out.push_back(ops);
    if (const Ops* ops = neon_backend()) out.push_back(ops);
    return out;
}

const Ops& active() { return *active_slot(); }

bool select(std::string_view name) {
    const Ops* ops = by_name(name);
    if (!ops) return false;
    active_slot() = ops;
    return true;
}

} // namespace dn::kernels
