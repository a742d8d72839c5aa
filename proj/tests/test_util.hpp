// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "farmsim/engine.hpp"

namespace farmsim::testutil {

// Minimal valid scenario: one machine group, one pool, no workload.
inline Scenario small_scenario(PilotModel model, int machine_count, const std::string& site,
                               PoolId pool = PoolId::GlobalPool) {
    Scenario sc;
    sc.name = "test";
    sc.seed = 1;
    sc.duration_s = 86400;
    MachineGroup g;
    g.name_prefix = "m";
    g.count = machine_count;
    g.cores = 16;
    g.memory_mb = 32000;
    g.site = site;
    sc.machines.push_back(g);
    sc.provisioning.model = model;
    sc.provisioning.glidein.start_expr_source = kProductionOnlyStartExpr;
    PoolSpec ps;
    ps.id = pool;
    sc.pools.push_back(ps);
    sc.lhc.transitions = {{0, Phase::Interfill}};
    return sc;
}

inline JobAd make_job(const std::string& id, JobClass cls, int cores, double work,
                      const std::string& desired_sites) {
    JobAd j;
    j.id = id;
    j.job_class = cls;
    j.request_cores = cores;
    j.request_memory_mb = cores * 2000ll;
    j.work_seconds = work;
    j.remaining_seconds = work;
    j.requirements = expr::parse(kSiteListRequirementsExpr);
    if (!desired_sites.empty())
        j.attributes.set("DESIRED_Sites", expr::Value::str(desired_sites));
    if (cls != JobClass::Analysis)
        j.attributes.set("WMAgent_AgentName", expr::Value::str("wmagent-test"));
    return j;
}

} // namespace farmsim::testutil
