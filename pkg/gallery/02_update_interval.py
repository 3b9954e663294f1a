# %% [markdown]
# # Choosing the feedback update interval
#
# A moving UE's downlink degrades between full feedback reports, while more
# frequent reports eat uplink airtime. The optimal interval balances both.

# %%
from lifi_feedback import NetworkConfig
from lifi_feedback import montecarlo as mc
from lifi_feedback.update_interval import (UpdateIntervalParams, expected_throughput,
                                           t_opt_closed_form, t_opt_numeric)

cfg = NetworkConfig()

# %% [markdown]
# Expected weighted sum throughput against the interval at 1 m/s.

# %%
p = UpdateIntervalParams.from_config(cfg, v=1.0)
for t_u in (0.01, 0.05, 0.1, 0.16, 0.3, 0.6):
    print(f"t_u = {t_u:5.2f} s: {expected_throughput(t_u, p).weighted_sum / 1e6:.3f} Mbit/s")

# %% [markdown]
# Three routes to the optimum: closed form, numeric root, Monte-Carlo grid search.

# %%
for v in (0.5, 1.0, 2.0):
    q = p.with_(v=v)
    greedy, *_ = mc.greedy_search_topt(q, 1000, seed=1, grid=mc.default_t_u_grid(q, 80))
    print(f"v = {v}: closed {t_opt_closed_form(q, overloaded=True) * 1e3:.1f} ms, "
          f"root {t_opt_numeric(q) * 1e3:.1f} ms, search {greedy * 1e3:.1f} ms")

# %% [markdown]
# The closed form scales as v^(-2/3).

# %%
print(t_opt_closed_form(p.with_(v=4.0)) / t_opt_closed_form(p), 4 ** (-2 / 3))
