"""Regenerate src/stegsiri/data/commands.txt (the built-in benign command corpus).

Usage: python scripts/make_corpus.py [call_share]
"""
import random, sys
rng = random.Random(7)
people = ["mom","dad","john","sarah","the office","my wife","alex","grandma","the doctor","emma",
          "michael","lucy","the dentist","tom","olivia","uncle bob","my boss","anna","david","kate"]
places = ["paris","london","rome","new york","tokyo","home","work","the airport","berlin","madrid",
          "chicago","boston","the station","downtown","the gym"]
times = ["seven","eight thirty","six am","noon","ten pm","nine fifteen","five","tomorrow morning"]
songs = ["some jazz","the beatles","my workout playlist","relaxing music","the latest podcast","rock music"]
things = ["milk","eggs","bread","coffee","batteries","a birthday gift"]
calls = ["call {p}", "call {p} on speaker", "call {p} mobile", "call {p} at home", "call {p} at work",
         "call {p} back"]
other = [
 "facetime {p}", "text {p} i am running late", "send a message to {p}", "tell {p} i will be there soon",
 "what is the weather in {l}", "what is the weather like today", "will it rain tomorrow in {l}",
 "set an alarm for {t}", "wake me up at {t}", "remind me to buy {th} at {t}",
 "remind me to call {p} tomorrow", "play {s}", "skip this song", "turn up the volume",
 "navigate to {l}", "how far is {l}", "directions to {l}", "how long to get to {l}",
 "what time is it in {l}", "set a timer for ten minutes", "add {th} to my shopping list",
 "open the camera", "turn on bluetooth", "turn off the lights", "what is on my calendar today",
 "schedule a meeting with {p} at {t}", "find a restaurant near me", "how old is the eiffel tower",
 "who won the game last night", "read my messages",
]
lines = []
for _ in range(500):
    t = rng.choice(calls) if rng.random() < (float(sys.argv[1]) if len(sys.argv) > 1 else 0.3) else rng.choice(other)
    lines.append(t.format(p=rng.choice(people), l=rng.choice(places), t=rng.choice(times),
                          s=rng.choice(songs), th=rng.choice(things)))
open("src/stegsiri/data/commands.txt","w").write("\n".join(lines)+"\n")
