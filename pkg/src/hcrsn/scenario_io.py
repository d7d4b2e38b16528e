"""Scenario persistence: versioned, human-readable JSON with units in keys.

Floats are written with Python's shortest round-trip representation, so
``load(save(s))`` reproduces the scenario exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

from .model import ChannelParams, Scenario

__all__ = ["SCHEMA_VERSION", "scenario_to_dict", "scenario_from_dict", "save_scenario", "load_scenario"]

SCHEMA_VERSION = 1


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "channels": [
            {
                "on_to_off_rate_per_s": ch.on_to_off_rate,
                "off_to_on_rate_per_s": ch.off_to_on_rate,
                "bandwidth_hz": ch.bandwidth_hz,
            }
            for ch in scenario.channels
        ],
        "num_transceivers": scenario.num_transceivers,
        "period_s": scenario.period_s,
        "sensing_phase_s": scenario.sensing_phase_s,
        "sensing_slot_s": scenario.sensing_slot_s,
        "sensing_energy_j": scenario.sensing_energy_j,
        "harvest_rates_w": scenario.harvest_rates_w.tolist(),
        "target_false_alarm": scenario.target_false_alarm,
        "samples_per_sensing": scenario.samples_per_sensing,
        "misdetect_threshold": scenario.misdetect_threshold,
        "collision_bound": scenario.collision_bound,
        "pu_snr_linear": scenario.pu_snr.tolist(),
        "data_gain_per_w": scenario.data_gain.tolist(),
        "demands_bits": scenario.demands_bits.tolist(),
        "p_max_w": scenario.p_max_w,
    }


def scenario_from_dict(payload: dict) -> Scenario:
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported scenario schema version: {version!r}")
    channels = tuple(
        ChannelParams(
            on_to_off_rate=ch["on_to_off_rate_per_s"],
            off_to_on_rate=ch["off_to_on_rate_per_s"],
            bandwidth_hz=ch["bandwidth_hz"],
        )
        for ch in payload["channels"]
    )
    return Scenario(
        channels=channels,
        num_transceivers=payload["num_transceivers"],
        period_s=payload["period_s"],
        sensing_phase_s=payload["sensing_phase_s"],
        sensing_slot_s=payload["sensing_slot_s"],
        sensing_energy_j=payload["sensing_energy_j"],
        harvest_rates_w=payload["harvest_rates_w"],
        target_false_alarm=payload["target_false_alarm"],
        samples_per_sensing=payload["samples_per_sensing"],
        misdetect_threshold=payload["misdetect_threshold"],
        collision_bound=payload["collision_bound"],
        pu_snr=payload["pu_snr_linear"],
        data_gain=payload["data_gain_per_w"],
        demands_bits=payload["demands_bits"],
        p_max_w=payload["p_max_w"],
    )


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")


def load_scenario(path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text()))
