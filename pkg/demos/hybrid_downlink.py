"""Mix surveyed tower positions with a random background population.

Planned deployments are rarely pure Poisson: the strongest interferers
are towers at known ground distances, with an unplanned remainder
spread at low density. Each trial here keeps the three towers fixed,
draws a fresh Poisson background, rolls line of sight per transmitter
and unit-mean fading per link, and sums. The fixed towers dominate, so
the curve inherits their geometry; the background adds a floor.
"""

import numpy as np

from aeropower import (URBAN, FixedTransmitterSet, PathlossExponents,
                       RadioConfig, ScenarioGeometry, dbm_from_watts,
                       simulate_hybrid, watts_from_dbm)

RADIO = RadioConfig(tx_power=watts_from_dbm(20.0), tx_gain=10.0,
                    rx_gain=10.0, carrier_freq=3.5e9)
EXP = PathlossExponents(alpha_los=2.0, alpha_nlos=3.0)


def main():
    towers = FixedTransmitterSet(transmitters=((150.0, "site-A"),
                                               (400.0, "site-B"),
                                               (900.0, "site-C")),
                                 extra_density=1e-6)
    heights = [30.0, 60.0, 120.0, 240.0, 480.0]
    scenario = ScenarioGeometry(height_h=heights[0], guard_radius=10.0,
                                outer_radius=4000.0, density=1e-6)
    curve = simulate_hybrid(towers, scenario, RADIO, EXP, URBAN,
                            trials=1200, seed=21, heights=heights)

    # free-space reference: all three towers in line of sight, no fading
    k = (RADIO.tx_power * RADIO.tx_gain * RADIO.rx_gain
         * (299792458.0 / (4.0 * np.pi * RADIO.carrier_freq)) ** 2)
    print("three fixed towers (150/400/900 m) plus 1e-6 /m^2 background:")
    print(f"  {'H [m]':>6}  {'hybrid dBm':>10}  {'all-LoS towers dBm':>19}")
    for i, h in enumerate(heights):
        friis = sum(k / (d * d + h * h) for d, _ in towers.transmitters)
        print(f"  {h:6.0f}  {curve.powers_dbm[i]:10.3f}  "
              f"{dbm_from_watts(friis):19.3f}")
    print()
    print("low receivers lose the distant towers to occlusion and sit "
          "below the all-LoS reference; by 120 m every tower is visible, "
          "and higher still the diffuse background holds the hybrid above "
          "the towers-only sum")


if __name__ == "__main__":
    main()
