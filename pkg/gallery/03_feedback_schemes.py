# %% [markdown]
# # Feedback schemes compared
#
# Overhead per frame and the resulting sum throughput of full, one-bit,
# limited-content and limited-frequency feedback.

# %%
from lifi_feedback import NetworkConfig
from lifi_feedback import montecarlo as mc

cfg = NetworkConfig()

# %%
overhead = mc.overhead_table(cfg, K_values=(64, 512, 2048))
for row in overhead.where(K=2048):
    print(row)

# %% [markdown]
# Sum throughput of the four schemes (small run; use 10^4 runs for tight error bars).

# %%
table = mc.scheme_sum_throughput(cfg, n_runs=200, seed=1)
for row in table.where():
    print(f"{row['scheme']:>6} v={row['velocity_mps']:g}: {row['mean_mbps']:.2f} "
          f"+- {row['stderr_mbps']:.2f} Mbit/s")

# %% [markdown]
# Downlink throughput as the number of UEs grows.

# %%
compare = mc.compare_schemes_downlink([5, 10], cfg, n_runs=20, seed=1)
for row in compare.where():
    print(row["n_ues"], row["scheme"], f"{row['mean_mbps']:.1f} Mbit/s")
