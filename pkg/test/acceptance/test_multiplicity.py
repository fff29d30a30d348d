# Copyright 2019 The hbubble Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.
"""Acceptance tests for the shipped multiplicity scenarios."""
import io
import json
import os

import pytest

from hbubble.cli import cmd_multiplicity, main
from hbubble.identifiers import Scenario
from hbubble.scenarios import scenario_config

from .acceptance_test_utils import load_scenarios

pytestmark = [pytest.mark.accept, pytest.mark.local]


@pytest.mark.parametrize("vector", load_scenarios())
def test_scenario_reaches_guaranteed_count(tmpdir, vector):
    config = scenario_config(
        Scenario(vector["scenario"]),
        degree=vector["degree"],
        eps=vector["eps"],
        box=vector["box"],
        scan=vector["scan"],
        gamma_scan=vector["gamma_scan"],
        out=str(tmpdir),
    )

    result = cmd_multiplicity(config)

    run = result.summary["runs"][-1]
    assert run["hypotheses"]["passed"]
    assert run["found"] >= vector["minimum_found"]
    for kind in vector["types"]:
        assert run["counts"][kind] > 0
    if vector["eps"] > 0:
        assert result.passed
        assert result.summary["smallest_h0"] == config.h0


@pytest.mark.slow
def test_solve_exports_bubbles(tmpdir):
    config_path = tmpdir.join("thm3.cfg")
    out = tmpdir.join("run")
    config_path.write(
        "\n".join(
            [
                "degree = 8",
                "eps = 0.01",
                "box = -5, 5, -5, 5, -5, 5",
                "scan = 5",
                "mesh_format = obj",
                "out = {}".format(out),
                "field:",
                "+ gaussian a=1 c=3,0,0 s=1",
                "- gaussian a=1 c=-3,0,0 s=1",
                "end",
                "",
            ]
        )
    )

    assert main(["solve", "--config", str(config_path), "--threads", "2"]) == 0

    with io.open(str(out.join("critical_points.jsonl")), encoding="utf-8") as stream:
        records = [json.loads(line) for line in stream]
    assert len(records) >= 2
    for index, record in enumerate(records):
        assert record["branch_free"]
        assert record["type"] in ("min", "max", "saddle")
        assert os.path.isfile(str(out.join("bubble-{}.obj".format(index))))
        assert os.path.isfile(str(out.join("bubble-{}.json".format(index))))
