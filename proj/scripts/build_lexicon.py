#!/usr/bin/env python3
"""Regenerates data/tagger_lexicon.tsv and data/lemma_exceptions.tsv.

Word lists below are hand-curated; lemminflect is used only to expand
verb/adjective/noun base forms into their inflected surface forms so the
tagger recognizes them.  Lemmas in lemma_exceptions.tsv come from the
irregular tables in this directory, never from lemminflect.

    pip install lemminflect
    python3 scripts/build_lexicon.py
"""
import os
import sys

from lemminflect import getAllInflections

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")

OTHER = """
hi hello hey bye goodbye oh ah uh um hmm wow yeah yep yup nope yes okay ok
please thanks congrats cheers alright aw ouch oops huh
n't 's 're 'll 've 'd 'm ca wo sha gonna wanna gotta 'cause
could would might must shall may ought cannot
everyone everybody everything someone somebody something anyone anybody
anything nothing nobody none noone whatever whoever whichever whenever
wherever however whose one ones
many much several every another either neither enough plenty lots
though although unless since till upon within without across along around
behind beside besides beyond near toward towards among amongst per via onto
inside outside throughout except despite amid underneath beneath versus
really actually probably definitely certainly usually sometimes maybe
perhaps anyway anyways else instead away back ever never always often
already yet soon ago again almost quite rather together also still even
just very too pretty so really totally exactly especially finally recently
suddenly seriously honestly basically literally simply hopefully luckily
unfortunately fortunately obviously apparently absolutely completely
nearly mostly mainly merely barely hardly quickly slowly easily
somewhere anywhere everywhere nowhere elsewhere here there meanwhile
otherwise therefore thus hence indeed furthermore moreover
two three four five six seven eight nine ten eleven twelve twenty thirty
forty fifty hundred thousand million billion
let's i'm i've i'll i'd
"""

# nouns that should never pick up a verb/adjective reading from the
# expanded lists below
NOUN = """
today tomorrow yesterday tonight weekend morning evening afternoon night
time day week month year life family friend people person man woman child
kid doctor hospital patient specialist teacher student school job work
boss employer office company money raise house home room car bus train
food dinner lunch breakfast dessert restaurant party birthday vacation
trip game movie music book phone computer dog cat baby mom dad mother
father brother sister wife husband girlfriend boyfriend city country
store shop water coffee tea beer wine weather rain snow sun problem idea
thing way kind sort type lot bit couple number part place world hand
head eye face body heart mind name question answer story news class
exam test lesson homework team sport ball gym pool beach park garden
kitchen bed door window floor street road mall church bank market
price bill ticket gift present card letter email message picture photo
camera video show series season episode song band concert dance
hour minute second moment today's future past history reason fact
""".split()

VERB = """
want find look go get make know think take see come give use tell ask
work seem feel try leave call need keep let begin help talk turn start
show hear play run move like live believe hold bring happen write provide
sit stand lose pay meet include continue set learn change lead understand
watch follow stop create speak read allow add spend grow open walk win
offer remember love consider appear buy wait serve die send expect build
stay fall cut reach kill remain suggest raise pass sell require report
decide pull return explain hope develop carry break receive agree support
hit produce eat cover catch draw choose cause point listen realize place
close involve increase finish visit wish thank worry cook clean drive
study travel dance sing swim sleep wake dress celebrate enjoy hate plan
save share teach borrow lend cry laugh smile hug kiss marry date invite
join apply order deliver fix repair wash shop rent move miss forget
forgive guess imagine prefer mind care fight argue complain apologize
promise prepare practice improve manage handle organize schedule check
test fill pick drop throw kick push lift carry ride fly climb jump
hurry rest relax tire bother scare surprise excite interest amaze
annoy upset embarrass disappoint worry trust doubt wonder notice
recognize reward deserve earn hire fire quit retire graduate attend
fail succeed pass score beat lose win compete train exercise
hike camp fish hunt bake boil fry grill order taste smell touch
feed water grow plant pour mix stir serve drink spill
answer reply text email message post upload download print type
search browse install update delete save copy paste
drive park crash steal rob arrest sue judge vote elect
borrow owe spend afford cost charge refund
rain snow freeze melt shine blow
admire adore appreciate encourage inspire motivate convince persuade
describe compare declare ignore explore restore store score
measure secure ensure assure endure capture injure cure
complete delete compete combine determine examine decline define
assume resume consume escape describe subscribe smoke joke provoke
invoke mistake dislike promote devote compute commute pollute contribute
distribute execute decide provide divide include conclude exclude
explode trade grade invade persuade arrive achieve produce reduce
introduce notice arrange change challenge exchange judge charge
merge urge indulge settle tickle handle struggle cycle juggle
freeze sneeze realize organize recognize criticize memorize
close choose lose propose suppose chose nurse sense collapse
create relate operate educate hesitate communicate graduate evaluate
negotiate initiate appreciate rate hate date skate
become overcome welcome hope cope shape tape rope vote note quote
bathe breathe loathe
need feed proceed exceed succeed heed wed embed speed
focus bias
""".split()

ADJ = """
good bad great big small little large long short high low old new young
happy sad angry mad upset nice kind fine sure right wrong true false
easy hard difficult simple busy free full empty hot cold warm cool
early late fast slow quick rich poor cheap expensive important
different same general special specific main major real whole
beautiful pretty ugly cute handsome smart clever stupid dumb funny
serious strange weird normal usual common rare safe dangerous healthy
sick ill tired hungry thirsty sleepy lonely lovely friendly silly
excited exciting interested interesting bored boring scared afraid
nervous worried proud glad sorry lucky unlucky awesome amazing
wonderful terrible horrible awful perfect favorite best worst
dark bright clean dirty quiet loud soft heavy light strong weak
thick thin fat tall wide narrow deep shallow close far near open
ready able unable available possible impossible likely unlikely
certain clear obvious fresh sweet sour bitter spicy delicious tasty
huge tiny giant brave calm gentle polite rude honest modest humble
noble wise fair crazy lazy pleasant grateful thankful helpful useful
careful careless hopeful successful famous popular personal private
public local national international professional medical
previous next last final recent current modern ancient
other over clever proper eager tender super silver sober sinister
slender upper inner outer former latter utter earnest
red blue green yellow black white brown pink purple orange gray grey
""".split()


def inflections(word, upos):
    out = set()
    for tag, forms in getAllInflections(word, upos=upos).items():
        out.update(f.lower() for f in forms)
    out.discard(word)
    return sorted(out)


def main():
    lexicon = {}

    def put(word, tag):
        word = word.lower()
        if word and word not in lexicon:
            lexicon[word] = tag

    aux = {"am", "is", "are", "was", "were", "be", "been", "being", "have",
           "has", "had", "having", "do", "does", "did", "doing"}
    with open(os.path.join(DATA, "stopwords.txt")) as fh:
        for line in fh:
            w = line.strip()
            if w and not w.startswith("#"):
                put(w, "VERB" if w in aux else "OTHER")
    for w in OTHER.split():
        put(w, "OTHER")
    for w in NOUN:
        put(w, "NOUN")
    for w in VERB:
        put(w, "VERB")
    for w in ADJ:
        put(w, "ADJ")
    for w in VERB:
        for f in inflections(w, "VERB"):
            put(f, "VERB")
    for w in ADJ:
        for f in inflections(w, "ADJ"):
            put(f, "ADJ")
    for w in NOUN:
        for f in inflections(w, "NOUN"):
            put(f, "NOUN")

    path = os.path.join(DATA, "tagger_lexicon.tsv")
    with open(path, "w") as fh:
        fh.write("# word<TAB>coarse tag (NOUN, VERB, ADJ, OTHER); generated by scripts/build_lexicon.py\n")
        for w in sorted(lexicon):
            fh.write(f"{w}\t{lexicon[w]}\n")
    print(f"{len(lexicon)} lexicon entries -> {path}", file=sys.stderr)

    exceptions = {}

    def exc(form, pos, lemma):
        key = (form, pos)
        if key not in exceptions:
            exceptions[key] = lemma

    rows = []
    with open(os.path.join(HERE, "irregular_verbs.txt")) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append(line.split())
    # base forms first, except where the base is also a more frequent
    # inflection of another verb ("lay" is read as the past of "lie")
    inflected_elsewhere = {"lay"}
    for row in rows:
        if row[0] not in inflected_elsewhere:
            exc(row[0], "VERB", row[0])
    for row in rows:
        for form in row[1:]:
            exc(form, "VERB", row[0])
    with open(os.path.join(HERE, "irregular_other.txt")) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            pos, form, lemma = line.split()
            exc(form, pos, lemma)
    with open(os.path.join(HERE, "rule_exceptions.txt")) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            pos, form, lemma = line.split()
            exc(form, pos, lemma)

    path = os.path.join(DATA, "lemma_exceptions.tsv")
    with open(path, "w") as fh:
        fh.write("# form<TAB>pos<TAB>lemma; generated by scripts/build_lexicon.py\n")
        for (form, pos) in sorted(exceptions):
            fh.write(f"{form}\t{pos}\t{exceptions[(form, pos)]}\n")
    print(f"{len(exceptions)} lemma exceptions -> {path}", file=sys.stderr)


if __name__ == "__main__":
    main()
