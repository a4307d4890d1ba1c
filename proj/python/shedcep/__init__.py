# Copyright 2026 shedcep authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Load-shedding complex event processing."""

import json as _json

from ._shedcep import (  # noqa: F401
    ConfigError,
    Event,
    ExprError,
    StreamParseError,
    StreamSchema,
    aggregate,
    bin_value,
    compare,
    describe_model,
    detect,
    estimate_rho,
    generate,
    generate_preset,
    read_stream,
    run_experiment_json,
    select_threshold,
    write_stream,
)
from ._shedcep import run_experiment as _run_experiment


def run_experiment(config, overrides=()):
    """Run an experiment file and return the report as a dict."""
    return _json.loads(_run_experiment(str(config), list(overrides)))


__all__ = [name for name in dir() if not name.startswith("_")]
