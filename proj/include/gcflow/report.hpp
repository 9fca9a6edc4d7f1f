#pragma once

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "gcflow/errors.hpp"

namespace gcflow {

// Time series of every monitored estimate, sampled on a fixed step cadence.
// The CSV schema is fixed; the extra in-memory fields (phi_min/phi_max and
// the final-state summaries) let the checks run without re-simulating.
struct EstimateSample {
    double t = 0.0;
    double s = 0.0;
    double theta = 0.0;
    double sup_grad_phi = 0.0;
    double m_min = 0.0;
    double m_max = 0.0;
    double detw_min = 0.0;
    double detw_max = 0.0;
    double mineig_w = 0.0;
    double osc_phitilde = 0.0;
    double sup_grad_phitilde = 0.0;
    double bdry_ortho_residual = 0.0;
    double phi_min = 0.0;
    double phi_max = 0.0;
};

struct EstimateReport {
    std::vector<EstimateSample> samples;
    double final_u_tilde_std_over_mean = 0.0;

    void write_csv(std::ostream& os) const {
        os << "t,s,theta,sup_grad_phi,m_min,m_max,detw_min,detw_max,mineig_w,"
              "osc_phitilde,sup_grad_phitilde,bdry_ortho_residual\n";
        os.precision(17);
        for (const auto& r : samples)
            os << r.t << ',' << r.s << ',' << r.theta << ',' << r.sup_grad_phi << ',' << r.m_min
               << ',' << r.m_max << ',' << r.detw_min << ',' << r.detw_max << ',' << r.mineig_w
               << ',' << r.osc_phitilde << ',' << r.sup_grad_phitilde << ','
               << r.bdry_ortho_residual << '\n';
    }

    void write_csv(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw ConfigError("cannot open report path for writing: " + path);
        write_csv(os);
    }
};

} // namespace gcflow
