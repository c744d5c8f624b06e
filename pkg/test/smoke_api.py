"""
Smoke checks against a running COGARCH Toolkit server
Run this after starting the server with: uvicorn app.main:app --reload
"""
import json
import sys

import requests

BASE_URL = "http://localhost:8000"

DRIVER = {
    "tau": 6.5,
    "lengths": [0.5, 2.5, 3.0, 0.5],
    "rates": [4, 10, 5, 30],
    "jump_dist": ["normal(2,4)", "normal(1.5,2.5)", "normal(2.5,1.5)", "normal(1.75,3)"],
}
COGARCH = {"p": 1, "q": 3, "alpha0": 1e-6, "alpha": [0.005], "beta": [2.1, 6.0, 0.6]}


def print_response(title, response):
    """Pretty print API response"""
    print(f"\n{'='*50}")
    print(f"{title}")
    print(f"{'='*50}")
    print(f"Status Code: {response.status_code}")
    try:
        print(f"Response: {json.dumps(response.json(), indent=2)[:2000]}")
    except ValueError:
        print(f"Response: {response.text}")


def check_root():
    print("\n🔍 Checking Root Endpoint...")
    response = requests.get(f"{BASE_URL}/", timeout=10)
    print_response("Root Endpoint", response)
    return response.status_code == 200


def check_conditions():
    print("\n🧮 Checking Condition Report...")
    response = requests.post(
        f"{BASE_URL}/api/conditions/check",
        json={"driver": DRIVER, "cogarch": COGARCH},
        timeout=60,
    )
    print_response("Condition Report", response)
    return response.status_code == 200 and response.json()["report"]["overall"] == "true"


def check_simulation():
    print("\n📈 Checking COGARCH Simulation...")
    response = requests.post(
        f"{BASE_URL}/api/cogarch/simulate",
        json={"driver": DRIVER, "cogarch": COGARCH, "periods": 30, "sample_interval": 0.25, "seed": 1},
        timeout=60,
    )
    print_response("COGARCH Simulation", response)
    if response.status_code != 200:
        return False, []
    return response.json()["n_samples"] == 780, response.json()["increments"]


def check_coherence(values):
    print("\n🌊 Checking Coherence Report...")
    response = requests.post(
        f"{BASE_URL}/api/pc_analysis/coherence",
        json={"values": values, "M": 240},
        timeout=120,
    )
    print_response("Coherence Report", response)
    return response.status_code == 200


def main():
    print("\n" + "="*50)
    print("🎯 COGARCH TOOLKIT SMOKE CHECKS")
    print("="*50)
    try:
        results = {"root": check_root(), "conditions": check_conditions()}
        ok, values = check_simulation()
        results["simulation"] = ok
        results["coherence"] = check_coherence(values) if values else False
    except requests.ConnectionError:
        print(f"\n❌ Cannot reach {BASE_URL}; is the server running?")
        return 1

    print("\n" + "="*50)
    for name, passed in results.items():
        print(f"{'✅' if passed else '❌'} {name}")
    return 0 if all(results.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
