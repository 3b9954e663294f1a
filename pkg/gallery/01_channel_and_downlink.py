# %% [markdown]
# # Optical channel and downlink resources
#
# Gains of the ceiling access points across the room, the frequency
# flatness of the received signal, and how many subcarriers a request needs.

# %%
import numpy as np

from lifi_feedback import NetworkConfig
from lifi_feedback.channel import (access_points_from_config, fluctuation_db, gain_map, los_gain,
                                   normalized_frequency_response, room_from_config,
                                   subcarrier_frequencies, transceiver_from_config)
from lifi_feedback.downlink import k_req
from lifi_feedback.update_interval import UpdateIntervalParams

cfg = NetworkConfig()
room, trx = room_from_config(cfg), transceiver_from_config(cfg)
aps = access_points_from_config(cfg)
centre = aps[len(aps) // 2]

# %% [markdown]
# DC gain of the centre AP on a 0.5 m grid (LOS plus first-order wall reflections).

# %%
xs, ys, gain = gain_map(centre, room, trx, 0.5, cfg.ue_height_m)
print(f"peak gain {gain.max():.3e} at the centre, corner gain {gain[0, 0]:.3e}")

# %% [markdown]
# Reflections make the response frequency selective, but only slightly.

# %%
f = subcarrier_frequencies(cfg.n_subcarriers, cfg.bw_down)
for xy in [(0.0, 0.0), (2.0, 1.0), (4.5, 4.5)]:
    pos = np.array([*xy, 0.0])
    ap = max(aps, key=lambda a: los_gain(a, pos, trx))
    print(xy, f"{fluctuation_db(normalized_frequency_response(ap, pos, room, trx, f)):.3f} dB")

# %% [markdown]
# Subcarriers needed for a request, exact quadratic versus the roll-off-free approximation.

# %%
p = UpdateIntervalParams.from_config(cfg)
for rate in (5e6, 10e6, 20e6):
    print(f"{rate / 1e6:>4.0f} Mbit/s at r0=0: exact {k_req(0.0, rate, p)}, "
          f"approx {k_req(0.0, rate, p, mode='approx')}")
