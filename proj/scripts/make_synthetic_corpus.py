#!/usr/bin/env python3
# Copyright 2026 The usersim Authors.
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
"""Generates a MultiWOZ-2.x-format restaurant corpus for offline work.

The output mirrors the layout of MultiWOZ data.json (goal per domain, a log
of alternating user/system turns, inline system dialog_act annotations).
User turns are unannotated. The true user act of each user turn is written
to a side file so annotation quality can be measured on the whole corpus.

Usage: make_synthetic_corpus.py --db data/restaurants.json --out data/
"""

import argparse
import json
import random

DAYS = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
        "sunday"]
TIMES = ["%d:%02d" % (h, m) for h in range(11, 21) for m in (0, 15, 30, 45)]

PRICE_WORDS = {
    "cheap": ["cheap", "cheap", "inexpensive", "cheap", "budget"],
    "moderate": ["moderate", "moderately priced", "moderate", "mid-priced"],
    "expensive": ["expensive", "expensive", "upscale", "pricey", "expensive"],
}
AREA_WORDS = {"centre": ["centre", "centre", "center", "city centre"],
              "north": ["north"], "south": ["south"], "east": ["east"],
              "west": ["west"]}

GREETINGS = ["", "", "", "hi , ", "hello , ", "hi there . ", "good afternoon . ",
             "hey , ", "hello there , ", "good evening , "]
POLITE = ["", "", " please", " , please", " if possible", " thanks"]

# --- user phrasing pools --------------------------------------------------

INFORM_OPEN = [
    "i am looking for {desc} .",
    "i'm looking for {desc} .",
    "i need {desc} .",
    "can you help me find {desc} ?",
    "could you recommend {desc} ?",
    "i would like to find {desc} .",
    "i want to eat at {desc} .",
    "please help me locate {desc} .",
    "we are trying to find {desc} tonight .",
    "my friends and i are hoping to find {desc} .",
    "is there {desc} you could suggest ?",
    "i'm in the mood for {desc} .",
    "do you know of {desc} ?",
    "i'd love to try {desc} while i'm in town .",
    "i'm hungry and searching for {desc} .",
]
INFORM_NAME = [
    "i am looking for a restaurant called {name} .",
    "can you give me information on {name} ?",
    "i'm trying to find {name} .",
    "do you have any info about a place named {name} ?",
    "i heard about {name} , can you look it up ?",
    "please find the restaurant {name} for me .",
    "i need details on {name} .",
]
INFORM_FOLLOW = [
    "i would prefer {frag} .",
    "{frag} would be great .",
    "let's go with {frag} .",
    "i'd like {frag} .",
    "something {frag} , i think .",
    "make it {frag} .",
    "{frag} please .",
    "i was thinking {frag} .",
    "ideally {frag} .",
    "i'm hoping for {frag} .",
]
DONTCARE = [
    "i don't care about the {slots} .",
    "it doesn't matter , any {slots} is fine .",
    "no preference on the {slots} .",
    "any {slots} will do .",
    "i have no preference for {slots} .",
    "i really don't mind which {slots} .",
]
INFORM_CHANGE = [
    "how about {frag} instead ?",
    "what about {frag} then ?",
    "okay , can you try {frag} instead ?",
    "hmm , is there one that's {frag} instead ?",
    "then let's change it to {frag} .",
    "alright , how about {frag} ?",
    "in that case , try {frag} .",
    "could you check for {frag} instead ?",
]
ANYTHING_ELSE = [
    "is there anything else ?",
    "do you have any other options ?",
    "can you suggest another one ?",
    "are there any other restaurants like that ?",
    "could you recommend a different place ?",
    "anything else available ?",
    "hmm , is there something else you'd recommend ?",
    "what other restaurants are there ?",
]
REQUEST = [
    "can i get the {reqs} ?",
    "could you give me the {reqs} ?",
    "what is the {reqs} ?",
    "may i have the {reqs} , please ?",
    "great , i'll need the {reqs} .",
    "sounds good . what's the {reqs} ?",
    "perfect ! can you tell me the {reqs} ?",
    "that sounds lovely . please send me the {reqs} .",
    "could i also get their {reqs} ?",
    "i just need the {reqs} for now .",
    "please provide the {reqs} .",
    "that will work . what are the {reqs} ?",
]
REQ_WORDS = {
    "address": ["address", "address", "street address", "exact address"],
    "phone": ["phone number", "phone number", "telephone number",
              "phone"],
    "postcode": ["postcode", "post code", "postcode", "postal code"],
}
BOOK_FULL = [
    "i would like to book a table for {people} people at {time} on {day} .",
    "can you book a table for {people} at {time} on {day} ?",
    "please reserve a table for {people} people on {day} at {time} .",
    "yes , book it for {people} people on {day} at {time} please .",
    "great , i'd like a reservation for {people} on {day} at {time} .",
    "could you make a booking for {people} people at {time} on {day} ?",
    "sounds perfect . we need a table for {people} at {time} on {day} .",
    "let's book it . {people} people , {day} , {time} .",
    "please make a reservation for {people} guests on {day} at {time} .",
]
BOOK_PART = {
    ("people",): ["i want to book a table for {people} people .",
                  "can you reserve a table for {people} ?",
                  "please book a table for {people} people ."],
    ("day",): ["i'd like to book a table on {day} .",
               "can you make a reservation for {day} ?"],
    ("time",): ["please book a table at {time} .",
                "could you reserve a table for {time} ?"],
    ("day", "people"): ["book a table for {people} people on {day} please .",
                        "i need a reservation for {people} on {day} ."],
    ("people", "time"): ["i'd like a table for {people} at {time} .",
                         "reserve for {people} people at {time} please ."],
    ("day", "time"): ["can i book for {day} at {time} ?",
                      "i want a reservation on {day} at {time} ."],
}
BOOK_ANSWER = {
    ("people",): ["there will be {people} of us .", "{people} people please .",
                  "a table for {people} , please .", "for {people} people ."],
    ("day",): ["on {day} please .", "{day} would be best .",
               "we want to go on {day} ."],
    ("time",): ["at {time} please .", "{time} works for us .",
                "we'd like to arrive at {time} ."],
    ("day", "people"): ["{people} people on {day} .",
                        "for {people} on {day} , please ."],
    ("people", "time"): ["{people} people at {time} .",
                         "for {people} at {time} please ."],
    ("day", "time"): ["{day} at {time} please .", "on {day} , at {time} ."],
    ("day", "people", "time"): ["{people} people on {day} at {time} .",
                                "for {people} people at {time} on {day} ."],
}
CHANGE_TIME = [
    "how about {time} instead ?",
    "can we try {time} then ?",
    "what about {time} ?",
    "okay , could you try for {time} instead ?",
    "is {time} available instead ?",
    "then let's change the time to {time} .",
]
GOODBYE = [
    "thank you , goodbye .",
    "thanks , that's all i need . bye .",
    "that is all , thank you so much .",
    "great , thanks for your help . goodbye !",
    "no , that will be all . have a nice day .",
    "thank you , that's everything . bye !",
    "perfect , thank you . goodbye .",
    "that's all i needed , thanks a lot . bye .",
    "no thanks , that's it . goodbye .",
    "awesome , thank you for all the help . have a great day .",
]

# --- system phrasing -------------------------------------------------------

SYS_ASK = {
    "food": ["what type of food would you like ?",
             "do you have a cuisine in mind ?"],
    "area": ["what area of town would you like ?",
             "which part of town do you prefer ?"],
    "pricerange": ["what price range are you looking for ?",
                   "do you have a price range in mind ?"],
}
SYS_PRESENT = [
    "{name} is a {food} restaurant in the {area} in the {pricerange} price range .",
    "i recommend {name} . it serves {food} food in the {area} and is {pricerange} .",
    "how about {name} ? it is a {pricerange} {food} place in the {area} .",
]
SYS_NOOFFER = ["i'm sorry , there are no restaurants matching {desc} .",
               "unfortunately i can't find {desc} ."]
SYS_BOOK_REQ = {"people": "how many people ?", "day": "what day ?",
                "time": "what time ?"}


def pick(rng, xs):
    return xs[rng.randrange(len(xs))]


def slot_fragment(rng, slot, value):
    if slot == "food":
        return pick(rng, ["{v} food", "{v} food", "a {v} place", "{v} cuisine"]).format(v=value)
    if slot == "area":
        w = pick(rng, AREA_WORDS[value])
        return pick(rng, ["the {w}", "in the {w}", "the {w} of town", "the {w} part of town"]).format(w=w)
    if slot == "pricerange":
        w = pick(rng, PRICE_WORDS[value])
        return pick(rng, ["{w}", "{w} prices", "something {w}", "in the {w} price range"]).format(w=w)
    return value


def describe(rng, cons):
    """Noun phrase naming a restaurant with the given constraints."""
    food = cons.get("food")
    area = cons.get("area")
    price = cons.get("pricerange")
    head = pick(rng, ["restaurant", "restaurant", "place to eat", "place",
                      "spot for dinner", "restaurant"])
    words = ["a"]
    if price:
        pw = pick(rng, PRICE_WORDS[price])
        words = ["an" if pw[0] in "aeiou" else "a", pw]
    if food:
        if len(words) == 1 and food[0] in "aeiou":
            words[0] = "an"
        words.append(food)
    words.append(head)
    if area:
        aw = pick(rng, AREA_WORDS[area])
        words.append(pick(rng, ["in the {a}", "in the {a} of town",
                                "on the {a} side", "in the {a} area"]).format(a=aw))
    return " ".join(words)


def join_words(ws):
    if len(ws) == 1:
        return ws[0]
    return ", ".join(ws[:-1]) + " and " + ws[-1]


class Gen:
    def __init__(self, db, seed):
        self.db = db
        self.rng = random.Random(seed)
        self.labels = {}

    def query(self, cons):
        out = []
        for r in self.db:
            if all(v == "dontcare" or r[k] == v for k, v in cons.items()):
                out.append(r)
        return sorted(out, key=lambda r: r["name"])

    def make_goal(self):
        rng = self.rng
        target = pick(rng, self.db)
        fail_info = {}
        if rng.random() < 0.10:
            info = {"name": target["name"]}
        else:
            k = pick(rng, [1, 2, 2, 3, 3])
            slots = rng.sample(["food", "area", "pricerange"], k)
            info = {s: target[s] for s in slots}
            if rng.random() < 0.10 and len(info) >= 2:
                slot = pick(rng, sorted(info))
                values = sorted({r[slot] for r in self.db})
                rng.shuffle(values)
                for v in values:
                    trial = dict(info)
                    trial[slot] = v
                    if not self.query(trial):
                        fail_info = trial
                        break
        u = rng.random()
        ask, book = (True, False) if u < 0.62 else ((False, True) if u < 0.91 else (True, True))
        reqt = sorted(rng.sample(["address", "phone", "postcode"], pick(rng, [1, 1, 2, 2, 3]))) if ask else []
        booking, fail_book = {}, {}
        if book:
            booking = {"people": str(rng.randint(1, 8)), "day": pick(rng, DAYS),
                       "time": pick(rng, TIMES[:-4])}
            if rng.random() < 0.12:
                fail_book = {"time": booking["time"]}
                h, m = map(int, booking["time"].split(":"))
                booking = dict(booking, time="%d:%02d" % (h + 1, m))
        return {"info": info, "fail_info": fail_info, "reqt": reqt,
                "book": booking, "fail_book": fail_book}

    def dialog(self, did):
        rng = self.rng
        g = self.make_goal()
        log = []
        labels = []

        def user(text, act):
            log.append({"text": text, "metadata": {}})
            labels.append(act)

        def system(text, acts):
            log.append({"text": text, "metadata": {"restaurant": {}},
                        "dialog_act": acts})

        initial = g["fail_info"] or g["info"]
        if "name" in initial:
            told = dict(initial)
            user(pick(rng, GREETINGS) + pick(rng, INFORM_NAME).format(name=initial["name"]),
                 "inform_type")
        else:
            keys = sorted(initial)
            rng.shuffle(keys)
            first = keys[:rng.randint(1, len(keys))]
            told = {k: initial[k] for k in first}
            user(pick(rng, GREETINGS) + pick(rng, INFORM_OPEN).format(desc=describe(rng, told)),
                 "inform_type")
            # the wizard asks until every goal slot or a no-preference is known
            while len([k for k in ("food", "area", "pricerange") if k in told]) < 3:
                missing = [k for k in ("food", "area", "pricerange") if k not in told]
                asked = missing[:rng.randint(1, min(2, len(missing)))]
                if len(told) >= 2 and rng.random() < 0.5:
                    break
                system(" ".join(pick(rng, SYS_ASK[s]) for s in asked),
                       {"Restaurant-Request": [[s.capitalize() if s != "pricerange" else "Price", "?"] for s in asked]})
                have = [s for s in asked if s in initial]
                if have:
                    frag = " and ".join(slot_fragment(rng, s, initial[s]) for s in have)
                    user(pick(rng, INFORM_FOLLOW).format(frag=frag), "inform_type")
                    for s in have:
                        told[s] = initial[s]
                    for s in asked:
                        if s not in have:
                            told[s] = "dontcare"
                else:
                    words = [{"food": pick(rng, ["food", "type of food", "cuisine"]),
                              "area": pick(rng, ["area", "location", "part of town"]),
                              "pricerange": pick(rng, ["price range", "price"])}[s] for s in asked]
                    user(pick(rng, DONTCARE).format(slots=" or ".join(words)), "inform_type")
                    for s in asked:
                        told[s] = "dontcare"
                remaining = [k for k in initial if k not in told]
                if remaining and rng.random() < 0.7:
                    continue
                if not remaining:
                    break
        # offer loop
        cons = {k: v for k, v in told.items()}
        offered = None
        for _ in range(3):
            res = self.query(cons)
            if not res:
                desc = describe(rng, {k: v for k, v in cons.items() if v != "dontcare"})
                system(pick(rng, SYS_NOOFFER).format(desc=desc),
                       {"Restaurant-NoOffer": [[k.capitalize() if k != "pricerange" else "Price", v]
                                               for k, v in cons.items() if v != "dontcare"]})
                changed = [k for k in g["info"] if g["info"][k] != cons.get(k)]
                if not changed:
                    changed = [sorted(k for k in cons if k != "name")[0]]
                    g["info"][changed[0]] = "dontcare"
                frag = " and ".join(slot_fragment(rng, s, g["info"][s]) for s in changed if g["info"][s] != "dontcare") \
                    or "any " + changed[0]
                user(pick(rng, INFORM_CHANGE).format(frag=frag), "inform_type_change")
                for s in changed:
                    cons[s] = g["info"][s]
                continue
            offered = res[0] if "name" in cons else pick(rng, res)
            break
        if offered is None:
            return None
        system(pick(rng, SYS_PRESENT).format(**offered),
               {"Restaurant-Inform": [["Name", offered["name"]], ["Food", offered["food"]],
                                      ["Area", offered["area"]], ["Price", offered["pricerange"]]]})
        if rng.random() < 0.06 and "name" not in cons:
            user(pick(rng, ANYTHING_ELSE), "anything_else")
            res = self.query(cons)
            others = [r for r in res if r["name"] != offered["name"]]
            if others:
                offered = pick(rng, others)
                system(pick(rng, SYS_PRESENT).format(**offered),
                       {"Restaurant-Recommend": [["Name", offered["name"]], ["Food", offered["food"]],
                                                 ["Area", offered["area"]]]})
            else:
                system("i'm afraid %s is the only one that matches ." % offered["name"],
                       {"Restaurant-Select": [["Name", offered["name"]]]})
        subtasks = []
        if g["reqt"]:
            subtasks.append("info")
        if g["book"]:
            subtasks.append("book")
        for task in subtasks:
            if task == "info":
                reqs = list(g["reqt"])
                rng.shuffle(reqs)
                groups = [reqs]
                if len(reqs) > 1 and rng.random() < 0.3:
                    groups = [reqs[:1], reqs[1:]]
                for grp in groups:
                    words = [pick(rng, REQ_WORDS[r]) for r in grp]
                    user(pick(rng, REQUEST).format(reqs=join_words(words)), "request_info")
                    key = {"address": "Addr", "phone": "Phone", "postcode": "Post"}
                    parts = []
                    for r in grp:
                        parts.append({"address": "the address is %s" % offered["address"],
                                      "phone": "the phone number is %s" % offered["phone"],
                                      "postcode": "the postcode is %s" % offered["postcode"]}[r])
                    system(" , ".join(parts) + " .",
                           {"Restaurant-Inform": [[key[r], offered[r]] for r in grp]})
            else:
                b = dict(g["book"])
                if g["fail_book"]:
                    b["time"] = g["fail_book"]["time"]
                if rng.random() < 0.6:
                    user(pick(rng, BOOK_FULL).format(**b), "make_reservation")
                    given = {"people", "day", "time"}
                else:
                    keys = sorted(rng.sample(["people", "day", "time"], rng.randint(1, 2)))
                    user(pick(rng, BOOK_PART[tuple(keys)]).format(**b), "make_reservation")
                    given = set(keys)
                    missing = sorted({"people", "day", "time"} - given)
                    system(" ".join(SYS_BOOK_REQ[m] for m in missing),
                           {"Booking-Request": [[m.capitalize(), "?"] for m in missing]})
                    user(pick(rng, BOOK_ANSWER[tuple(missing)]).format(**b), "make_reservation")
                if g["fail_book"]:
                    system("i'm sorry , %s is fully booked at %s . would you like another time ?"
                           % (offered["name"], b["time"]),
                           {"Booking-NoBook": [["Time", b["time"]]]})
                    user(pick(rng, CHANGE_TIME).format(time=g["book"]["time"]), "reservation_change_time")
                ref = "%08x" % rng.getrandbits(32)
                system("booking was successful . the table will be reserved for 15 minutes . "
                       "your reference number is %s ." % ref,
                       {"Booking-Book": [["Ref", ref], ["Name", offered["name"]]]})
        user(pick(rng, GOODBYE), "goodbye")
        system("you're welcome , have a great day !", {"general-bye": [["none", "none"]]})
        self.labels[did] = labels
        goal = {"restaurant": {"info": g["info"], "fail_info": g["fail_info"], "reqt": g["reqt"],
                               "book": g["book"], "fail_book": g["fail_book"]},
                "hotel": {}, "attraction": {}, "train": {}, "taxi": {}, "police": {}, "hospital": {},
                "message": []}
        return {"goal": goal, "log": log}

    def hotel_dialog(self):
        rng = self.rng
        area = pick(rng, ["north", "south", "east", "west", "centre"])
        log = [
            {"text": "i need a hotel in the %s with free parking ." % area, "metadata": {}},
            {"text": "the acorn guest house is a nice choice .", "metadata": {},
             "dialog_act": {"Hotel-Inform": [["Name", "acorn guest house"]]}},
            {"text": "thanks , goodbye .", "metadata": {}},
            {"text": "goodbye .", "metadata": {}, "dialog_act": {"general-bye": [["none", "none"]]}},
        ]
        goal = {"restaurant": {}, "hotel": {"info": {"area": area, "parking": "yes"}},
                "attraction": {}, "train": {}, "taxi": {}, "police": {}, "hospital": {}, "message": []}
        return {"goal": goal, "log": log}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--db", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--dialogs", type=int, default=900)
    ap.add_argument("--hotel", type=int, default=60)
    ap.add_argument("--seed", type=int, default=2019)
    args = ap.parse_args()
    db = json.load(open(args.db))
    gen = Gen(db, args.seed)
    data = {}
    n = 0
    while n < args.dialogs:
        did = "SNG%05d.json" % n
        d = gen.dialog(did)
        if d is None:
            continue
        data[did] = d
        n += 1
    for i in range(args.hotel):
        data["HOT%05d.json" % i] = gen.hotel_dialog()
    with open(args.out.rstrip("/") + "/synthetic_multiwoz.json", "w") as f:
        json.dump(data, f, indent=1, sort_keys=True)
    with open(args.out.rstrip("/") + "/synthetic_user_acts.json", "w") as f:
        json.dump(gen.labels, f, indent=1, sort_keys=True)


if __name__ == "__main__":
    main()
