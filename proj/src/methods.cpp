#include "convlab/methods.hpp"

#include <string>
#include <vector>

#include "convlab/errors.hpp"

namespace convlab {

namespace {

template <class E>
std::vector<E> unwrap(std::span<const EvidenceItem> history, const char* family) {
    std::vector<E> out;
    out.reserve(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) {
        const E* e = std::get_if<E>(&history[i]);
        if (!e) throw ConfigError(std::string("evidence item ") + std::to_string(i) + " is not " + family + " evidence");
        out.push_back(*e);
    }
    return out;
}

}  // namespace

Verdict apply_method(const MethodSpec& method, std::span<const EvidenceItem> history) {
    if (history.empty()) throw ConfigError("apply_method needs a non-empty history");
    return std::visit(
        [&](const auto& m) -> Verdict {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, lineworld::Method>) {
                return m(unwrap<Interval>(history, "interval"));
            } else if constexpr (std::is_same_v<M, gaussian::TestRule>) {
                const auto s = unwrap<gaussian::SampleSummary>(history, "sample-summary").back();
                return gaussian::decide(m, s.n, s.mean);
            } else {
                return perrin::decide(m, unwrap<perrin::Prism>(history, "prism"));
            }
        },
        method);
}

}  // namespace convlab
