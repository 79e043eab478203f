"""Example script: track one synthetic scenario and print its metrics."""
from src.evaluation.report import format_key_values
from src.services.tracking_service import TrackingService
from src.synth.generator import generate
from src.synth.scenario import OcclusionWindow, make_scenario_config
from src.tracker.tracker_config import make_tracker_config


def track_example():
    """Run FAC and the baseline on a scenario with one long dropout."""
    scenario = make_scenario_config(
        seed=7,
        n_targets=5,
        n_frames=200,
        occlusions=[OcclusionWindow(target=2, start=60, end=100)],
    )
    sequence = generate(scenario)

    for use_fac in (False, True):
        cfg = make_tracker_config(d_et=512, use_fac=use_fac)
        try:
            run = TrackingService(cfg).run(sequence.frames(), gt=sequence.gt)
        except Exception as e:
            print(f"Error: {str(e)}")
            continue
        print(f"use_fac = {str(use_fac).lower()}")
        print("=" * 50)
        print(format_key_values(run.metrics))


if __name__ == "__main__":
    track_example()
