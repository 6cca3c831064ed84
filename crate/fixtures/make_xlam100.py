"""Regenerates xlam100.jsonl: 100 single-turn, xLAM-style samples.

The mix is chosen so every augmentation strategy has both applicable and
inapplicable inputs: vague prompts that never mention the required value,
calls to tools missing from the offered list, argument-free calls, paired
calls and direct responses.
"""
import json
import random
from pathlib import Path

rng = random.Random(20261019)
TOOLS = {
    "get_weather": {"description": "Current weather for a city", "parameters": {"city": {"type": "string", "required": True}, "unit": {"type": "string", "required": False}}},
    "get_time": {"description": "Current time in a timezone", "parameters": {"tz": {"type": "string", "required": True}}},
    "search": {"description": "Web search", "parameters": {"query": {"type": "string", "required": True}, "limit": {"type": "integer", "required": False}}},
    "convert": {"description": "Currency conversion", "parameters": {"amount": {"type": "float", "required": True}, "from": {"type": "string", "required": True}, "to": {"type": "string", "required": True}}},
    "set_alarm": {"description": "Set an alarm", "parameters": {"hour": {"type": "integer", "required": True}, "enabled": {"type": "boolean", "required": False}}},
    "list_devices": {"description": "List paired devices", "parameters": {}},
}
CITIES = ["Paris", "Rome", "Oslo", "Lima", "Cairo", "Seoul"]
TZ = ["UTC", "CET", "EST", "JST"]
QUERIES = ["rust borrow checker", "tide tables", "bread recipes", "jazz history"]
CURRENCIES = ["USD", "EUR", "JPY", "GBP"]


def schema(names):
    return [dict(name=n, **TOOLS[n]) for n in names]


def fmt(v):
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, str):
        return json.dumps(v)
    return str(v)


def call_text(calls):
    return "[" + ", ".join(f"{n}(" + ", ".join(f"{k}={fmt(v)}" for k, v in a.items()) + ")" for n, a in calls) + "]"


def make(kind):
    if kind == "weather":
        c = rng.choice(CITIES)
        a = {"city": c}
        if rng.random() < 0.4:
            a["unit"] = rng.choice(["C", "F"])
        if rng.random() < 0.25:
            return "What's the weather like where my sister lives?", [("get_weather", a)]
        return f"What's the weather in {c}?", [("get_weather", a)]
    if kind == "time":
        t = rng.choice(TZ)
        return f"What time is it in {t}?", [("get_time", {"tz": t})]
    if kind == "search":
        q = rng.choice(QUERIES)
        a = {"query": q}
        if rng.random() < 0.5:
            a["limit"] = rng.choice([3, 5, 10])
        return f"Find me {a.get('limit', 'some')} results about {q}.", [("search", a)]
    if kind == "convert":
        amount = rng.choice([10, 12.5, 100, 0.75])
        f, t = rng.sample(CURRENCIES, 2)
        return f"Convert {amount} {f} to {t}.", [("convert", {"amount": amount, "from": f, "to": t})]
    if kind == "alarm":
        h = rng.choice([6, 7, 8])
        a = {"hour": h}
        if rng.random() < 0.5:
            a["enabled"] = rng.random() < 0.5
        return f"Wake me at {h} tomorrow.", [("set_alarm", a)]
    if kind == "devices":
        return "Which devices are paired?", [("list_devices", {})]
    c = rng.choice(CITIES)
    t = rng.choice(TZ)
    return f"Weather in {c} and the time in {t}?", [("get_weather", {"city": c}), ("get_time", {"tz": t})]


kinds = ["weather"] * 26 + ["time"] * 14 + ["search"] * 14 + ["convert"] * 12 + ["alarm"] * 10 + ["devices"] * 6 + ["pair"] * 10
rng.shuffle(kinds)
rows = []
for i, kind in enumerate(kinds):
    user, calls = make(kind)
    offered = sorted({n for n, _ in calls})
    if rng.random() < 0.1:
        offered = offered[1:]
    extra = [n for n in TOOLS if n not in offered and rng.random() < 0.15]
    rows.append({
        "id": f"x{i:03d}",
        "schemas": schema(offered + extra),
        "turns": [{"role": "user", "content": user}],
        "gt": [{"name": n, "arguments": a} for n, a in calls],
        "gt_text": call_text(calls),
        "source": "xlam",
        "multi_turn": False,
    })
decline = "I can't help with that using the available tools."
for i in range(len(rows), 100):
    rows.append({
        "id": f"x{i:03d}",
        "schemas": schema(["search"]),
        "turns": [{"role": "user", "content": rng.choice(["Tell me a joke.", "Order a pizza.", "Call my mom."])}],
        "gt": {"direct_response": decline},
        "gt_text": decline,
        "source": "xlam",
        "multi_turn": False,
    })
assert len(rows) == 100
out = Path(__file__).with_name("xlam100.jsonl")
out.write_text("".join(json.dumps(r) + "\n" for r in rows))
