#pragma once

// A model couples a regime with a way to sample face coefficients. The preset
// model wraps TransportLaw + Forcing; tests plug in closed-form coefficients.

#include <functional>
#include <string>
#include <utility>

#include "tdm/physics.hpp"
#include "tdm/regime.hpp"

namespace tdm {

using CoefficientSampler =
    std::function<CoefficientField(const RegimeSpec&, const Grid&, double t, double tau, double theta, CoefficientPart)>;

struct Model {
    RegimeSpec regime;
    CoefficientSampler sampler;
    std::string label = "custom";

    CoefficientField sample(const Grid& g, double t, double tau, double theta, CoefficientPart part) const
    {
        return sampler(regime, g, t, tau, theta, part);
    }

    Model with_epsilon(double eps) const
    {
        Model m = *this;
        m.regime = regime.with_epsilon(eps);
        return m;
    }
};

inline Model make_model(const RegimeSpec& regime, const Forcing& forcing)
{
    regime.validate();
    Model m;
    m.regime = regime;
    m.label = to_string(regime.kind) + "/" + to_string(regime.law.kind) + "/" + to_string(forcing.preset());
    m.sampler = [forcing](const RegimeSpec& r, const Grid& g, double t, double tau, double theta, CoefficientPart part) {
        return assemble_field(r.law, forcing, r, g, t, tau, theta, part);
    };
    return m;
}

}  // namespace tdm
