#ifndef WHOMOG_CHECK_HPP
#define WHOMOG_CHECK_HPP

#include <whomog/config.hpp>

namespace whomog {

/*! Aggregated model/mesh diagnostics behind the `check` subcommand: mesh
//  invariants, the model data checks, trace inequality
//  calibration, unfolding identities, and nonlinear unfolding
//  compatibility of the configured kinetics. */
struct CheckReport {
    struct Item {
        std::string name;
        bool ok = false;
        std::string detail;
    };
    std::vector<Item> items;

    bool ok() const {
        for (const auto& i : items)
            if (!i.ok) return false;
        return true;
    }
};

CheckReport run_checks(const RunConfig& cfg);

} // namespace whomog

#endif
