"""Synthetic scenarios: the bundled tutorial system, a remote-generation
system, and seeded random systems for property checks."""

from __future__ import annotations

import numpy as np

from .scenario import (
    CorridorSpec,
    EpochSpec,
    GenTechSpec,
    InstateRps,
    OptionsSpec,
    PolicySpec,
    Scenario,
    StorTechSpec,
    ZoneSpec,
)

RENEWABLE_CLASSES = {
    "solar": frozenset({"all_re", "re", "pv"}),
    "wind": frozenset({"all_re", "re", "wind"}),
    "hydro": frozenset({"all_re"}),
}


def epochs(n: int, duration: int = 5) -> tuple[EpochSpec, ...]:
    return tuple(EpochSpec(k, k * duration, duration, f"epoch{k}") for k in range(n))


def gen_tech(tech_id: str, n_epochs: int, n_zones: int, n_hours: int, *, capacity=0.0, var_cost=0.0,
             capital_cost=0.0, crf=1.0, elcc=1.0, build_limit=np.nan, cap_factor=1.0,
             emission_rate=0.0, policy_classes=(), offshore_wind=False) -> GenTechSpec:
    """Generator with every per-epoch/per-zone field broadcast to full shape."""
    ez = (n_epochs, n_zones)
    return GenTechSpec(
        id=tech_id,
        capacity=np.broadcast_to(capacity, ez),
        var_cost=np.broadcast_to(var_cost, ez),
        capital_cost=np.broadcast_to(capital_cost, ez),
        crf=np.broadcast_to(crf, ez),
        elcc=np.broadcast_to(elcc, (n_epochs,)),
        build_limit=np.broadcast_to(build_limit, (n_zones,)),
        cap_factor=np.broadcast_to(cap_factor, (n_epochs, n_zones, n_hours)),
        emission_rate=emission_rate,
        policy_classes=frozenset(policy_classes),
        offshore_wind=offshore_wind,
    )


def stor_tech(tech_id: str, n_epochs: int, n_zones: int, *, power=0.0, energy=None, capital_cost=0.0,
              crf=1.0, elcc=1.0, build_limit=np.nan, duration=4.0, efficiency=0.85) -> StorTechSpec:
    ez = (n_epochs, n_zones)
    power = np.broadcast_to(power, ez)
    energy = power * duration if energy is None else np.broadcast_to(energy, ez)
    return StorTechSpec(
        id=tech_id,
        power_capacity=power,
        energy_capacity=energy,
        capital_cost=np.broadcast_to(capital_cost, ez),
        crf=np.broadcast_to(crf, ez),
        elcc=np.broadcast_to(elcc, (n_epochs,)),
        build_limit=np.broadcast_to(build_limit, (n_zones,)),
        duration=duration,
        efficiency=efficiency,
    )


def solar_profile(n_hours: int) -> np.ndarray:
    """Daily bell-shaped output between 06:00 and 18:00."""
    h = np.arange(n_hours) % 24
    return np.clip(np.sin((h - 6) / 12 * np.pi), 0.0, None).round(4)


def year_fraction(n_hours: int) -> float:
    """Share of a year covered by ``n_hours``; fixture capital costs are
    scaled by it so short modeled years keep realistic build economics."""
    return n_hours / 8760.0


def load_profile(n_hours: int, base: float, swing: float) -> np.ndarray:
    """Evening-peaking daily load shape."""
    h = np.arange(n_hours) % 24
    return (base + swing * np.sin((h - 11) / 24 * 2 * np.pi)).round(3)


def tutorial(n_hours: int = 24) -> Scenario:
    """Three zones, two epochs, gas and solar, one battery type.

    Zones A and B sit in state NJ and PA respectively; zone C straddles PA and
    MD. A carries the most load and the least room to build, C has the best
    solar, and two corridors A-B and B-C link them. Policies include a solar
    carve-out, an in-state requirement in NJ, and storage/solar targets.
    """
    E, Z, H = 2, 3, n_hours
    f = year_fraction(H)
    sol = solar_profile(H)
    zones = (
        ZoneSpec("A", 40.2, -74.6, {"NJ": 1.0}, {"NJ": 1}),
        ZoneSpec("B", 40.3, -76.9, {"PA": 1.0}, {"PA": 1}),
        ZoneSpec("C", 39.4, -77.5, {"PA": 0.4, "MD": 0.6}, {"PA": 1, "MD": 1}),
    )
    corridors = (
        CorridorSpec("AB", "A", "B", 300.0, 300.0, 120.0, cost_per_mw_mile=2076.0 * f, crf=0.1,
                     max_reinforcement_factor=5.0),
        CorridorSpec("BC", "B", "C", 200.0, 150.0, 90.0, cost_per_mw_mile=2076.0 * f, crf=0.1),
    )
    cf_solar = np.stack([np.stack([sol * k for k in (0.85, 0.9, 1.0)]) for _ in range(E)])
    gas = gen_tech(
        "gas", E, Z, H,
        capacity=np.array([[600.0, 450.0, 250.0], [520.0, 400.0, 220.0]]),
        var_cost=np.array([[38.0, 35.0, 36.0], [40.0, 37.0, 38.0]]),
        capital_cost=1.1e6 * f, crf=0.09, elcc=np.array([0.9, 0.9]),
        build_limit=np.array([150.0, 600.0, 600.0]), emission_rate=0.4,
    )
    solar = gen_tech(
        "solar", E, Z, H,
        capacity=np.array([[50.0, 80.0, 120.0], [50.0, 80.0, 120.0]]),
        capital_cost=np.array([[1.4e6, 1.2e6, 1.0e6], [1.2e6, 1.0e6, 0.85e6]]) * f,
        crf=0.08, elcc=np.array([0.4, 0.3]), build_limit=np.array([400.0, 800.0, 1500.0]),
        cap_factor=cf_solar, policy_classes=RENEWABLE_CLASSES["solar"],
    )
    battery = stor_tech(
        "battery", E, Z, power=np.array([[20.0, 0.0, 0.0], [20.0, 0.0, 0.0]]),
        capital_cost=np.array([[1.6e6, 1.6e6, 1.6e6], [1.3e6, 1.3e6, 1.3e6]]) * f, crf=0.1,
        elcc=np.array([0.9, 0.8]), build_limit=np.array([300.0, 300.0, 300.0]),
    )
    load = np.stack([
        np.stack([load_profile(H, 650.0, 150.0), load_profile(H, 380.0, 80.0), load_profile(H, 220.0, 40.0)]),
        np.stack([load_profile(H, 700.0, 170.0), load_profile(H, 400.0, 90.0), load_profile(H, 240.0, 50.0)]),
    ])
    annual_load = load.sum(axis=(1, 2))
    policies = PolicySpec(
        regional_rps={(0, "all_re"): round(0.15 * annual_load[0], 1), (1, "all_re"): round(0.25 * annual_load[1], 1),
                      (1, "pv"): round(0.05 * annual_load[1], 1)},
        instate_rps={(0, "NJ"): InstateRps(0.2, 0.3), (1, "NJ"): InstateRps(0.3, 0.5)},
        capacity_targets={(1, "NJ", "storage"): 60.0, (1, "PA", "solar"): 300.0, (1, "MD", "solar"): 150.0},
    )
    options = OptionsSpec(
        reliability_mode="reserve_margin", rsv=0.15,
        cap_target={0: 1650.0, 1: 1800.0}, queue_limits_enabled=False,
    )
    return Scenario(epochs(E), zones, corridors, (gas, solar), (battery,), load, policies, options)


def remote_generation(n_hours: int = 24) -> Scenario:
    """Two zones: cheap wind in remote zone R, all load in city zone C.

    Wind in R is the cheapest energy once transmission is ignored, so a
    copper-plate plan builds it and the follow-up transmission plan has to
    carry its output over a long corridor. Priced together, local solar and
    storage in C beat wind plus corridor.
    """
    E, Z, H = 1, 2, n_hours
    f = year_fraction(H)
    sol = solar_profile(H)
    h = np.arange(H) % 24
    wind_cf = (0.55 + 0.25 * np.cos(h / 24 * 2 * np.pi)).round(4)
    zones = (ZoneSpec("R", 41.0, -80.0), ZoneSpec("C", 40.0, -75.0))
    corridors = (CorridorSpec("RC", "R", "C", 50.0, 50.0, 1200.0, cost_per_mw_mile=2076.0 * f, crf=0.1),)
    load = np.stack([np.zeros(H), load_profile(H, 400.0, 60.0)])[None]
    wind = gen_tech("wind", E, Z, H, capital_cost=np.array([[0.9e6, 3.0e6]]) * f, crf=0.08,
                    cap_factor=np.stack([wind_cf, 0.5 * wind_cf])[None],
                    policy_classes=RENEWABLE_CLASSES["wind"])
    solar = gen_tech("solar", E, Z, H, capital_cost=np.array([[1.0e6, 0.85e6]]) * f, crf=0.08,
                     cap_factor=np.stack([0.6 * sol, sol])[None], policy_classes=RENEWABLE_CLASSES["solar"])
    gas = gen_tech("gas", E, Z, H, capacity=np.array([[0.0, 500.0]]), var_cost=60.0,
                   capital_cost=1.0e6 * f, crf=0.09, emission_rate=0.4)
    battery = stor_tech("battery", E, Z, capital_cost=0.9e6 * f, crf=0.1, efficiency=0.85)
    return Scenario(epochs(E), zones, corridors, (wind, solar, gas), (battery,), load,
                    PolicySpec(), OptionsSpec(rsv=0.0))


def random_scenario(seed: int, n_zones: int | None = None, n_epochs: int | None = None,
                    n_hours: int | None = None) -> Scenario:
    """Seeded random system that is always feasible in every planning mode.

    Each zone can build gas without limit, and corridors form a connected
    chain (plus random extras) with unlimited reinforcement, so the
    transmission stage can always deliver a copper-plate resource plan.
    """
    rng = np.random.default_rng(seed)
    Z = n_zones or int(rng.integers(2, 6))
    E = n_epochs or int(rng.integers(1, 3))
    H = n_hours or int(rng.choice([24, 48, 168]))
    f = year_fraction(H)
    zone_ids = [f"Z{k}" for k in range(Z)]
    zones = tuple(ZoneSpec(z, float(rng.uniform(38, 42)), float(rng.uniform(-81, -74))) for z in zone_ids)
    pairs = [(k, k + 1) for k in range(Z - 1)]
    for a in range(Z):
        for b in range(a + 2, Z):
            if rng.random() < 0.3:
                pairs.append((a, b))
    corridors = tuple(
        CorridorSpec(f"L{a}{b}", zone_ids[a], zone_ids[b], float(rng.uniform(0, 200)), float(rng.uniform(0, 200)),
                     float(rng.uniform(50, 250)), cost_per_mw_mile=2076.0 * f, crf=0.1)
        for a, b in pairs
    )
    sol = solar_profile(H)
    base = rng.uniform(100, 600, size=(1, Z, 1))
    growth = 1 + 0.05 * np.arange(E)[:, None, None]
    shape = np.stack([load_profile(H, 1.0, rng.uniform(0.1, 0.3)) for _ in range(Z)])[None]
    load = (base * growth * shape * rng.uniform(0.95, 1.05, size=(E, Z, H))).round(3)
    gas = gen_tech("gas", E, Z, H, capacity=(rng.uniform(0.2, 1.2, size=(E, Z)) * base[0, :, 0]).round(1),
                   var_cost=rng.uniform(25, 50, size=(E, Z)).round(2),
                   capital_cost=rng.uniform(0.8e6, 1.4e6, size=(E, Z)).round(-3) * f, crf=0.09,
                   elcc=0.9, emission_rate=0.4)
    solar = gen_tech("solar", E, Z, H, capital_cost=rng.uniform(0.7e6, 1.6e6, size=(E, Z)).round(-3) * f, crf=0.08,
                     elcc=0.3, cap_factor=sol[None, None, :] * rng.uniform(0.6, 1.0, size=(E, Z, 1)),
                     policy_classes=RENEWABLE_CLASSES["solar"])
    stors = ()
    if rng.random() < 0.7:
        stors = (stor_tech("battery", E, Z, capital_cost=rng.uniform(0.8e6, 1.5e6, size=(E, Z)).round(-3) * f,
                           crf=0.1, elcc=0.8, efficiency=round(float(rng.uniform(0.8, 0.95)), 3)),)
    rps = {}
    if rng.random() < 0.5:
        rps[(E - 1, "pv")] = round(0.05 * float(load[E - 1].sum()), 1)
    options = OptionsSpec(rsv=float(rng.choice([0.0, 0.15])))
    return Scenario(epochs(E), zones, corridors, (gas, solar), stors, load, PolicySpec(regional_rps=rps), options)
