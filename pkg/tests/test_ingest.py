import io

import pytest

from compnet.ingest import (GroundTruthTable, MatchEvent, ParseError, align_ground_truth,
                            normalize_actor_id, parse_ground_truth, parse_match_log,
                            survivor_outcome_score, write_ground_truth, write_match_log)


def test_generic_row_maps_fields():
    events = parse_match_log(b"competition,round,winner,loser\nS1,3,alice,bob\n")
    assert events == [MatchEvent("S1", 3, "alice", "bob")]


def test_sorted_by_competition_then_round_keeping_input_order():
    data = (b"competition,round,winner,loser\n"
            b"S10,1,a,b\nS2,2,c,d\nS2,1,e,f\nS2,1,g,h\n")
    events = parse_match_log(data)
    assert [(e.competition_id, e.round, e.winner) for e in events] == [
        ("S2", 1, "e"), ("S2", 1, "g"), ("S2", 2, "c"), ("S10", 1, "a")]


def test_self_loop_rejected_not_fatal():
    rejects = []
    events = parse_match_log(b"competition,round,winner,loser\nS1,1,a,a\nS1,1,a,b\n",
                             rejects=rejects)
    assert len(events) == 1
    assert [r.line for r in rejects] == [2]


@pytest.mark.parametrize("body,line", [
    (b"competition,round,winner,loser\nS1,x,a,b\n", 2),
    (b"competition,round,winner,loser\nS1,1,a,b\nS1,0,a,b\n", 3),
    (b"competition,round,winner\nS1,1,a\n", 1),
])
def test_parse_error_carries_line(body, line):
    with pytest.raises(ParseError) as err:
        parse_match_log(body)
    assert err.value.line == line


def test_unknown_format():
    with pytest.raises(ParseError):
        parse_match_log(b"a\n", "tennis")


def test_chess_draws_emit_nothing():
    data = (b"round,white,black,result\n"
            b"1,alice,bob,1/2-1/2\n1,carol,dave,1-0\n2,alice,carol,0-1\n")
    events = parse_match_log(data, "chess")
    assert events == [MatchEvent("chess", 1, "carol", "dave"),
                      MatchEvent("chess", 2, "carol", "alice")]
    assert parse_match_log(b"round,white,black,result\n1,a,b,1/2-1/2\n", "chess") == []


def test_chess_bad_result():
    with pytest.raises(ParseError):
        parse_match_log(b"round,white,black,result\n1,a,b,*\n", "chess")


def test_survivor_votes_and_na_skipped():
    data = (b"version_season,episode,castaway_id,vote_id\n"
            b"US01,1,US0001,US0002\nUS01,1,US0003,NA\nUS01,2,US0002,US0001\n")
    events = parse_match_log(data, "survivor")
    assert events == [MatchEvent("US01", 1, "US01:US0001", "US01:US0002"),
                      MatchEvent("US01", 2, "US01:US0002", "US01:US0001")]


def test_dota_weeks_and_missing_team_rejected():
    data = (b"week,radiant_team_id,dire_team_id,radiant_win\n"
            b"39,8629005.0,15,True\n39,,15,False\n40,15,8629005,False\n")
    rejects = []
    events = parse_match_log(data, "dota", rejects=rejects)
    assert events == [MatchEvent("dota", 39, "8629005", "15"),
                      MatchEvent("dota", 40, "8629005", "15")]
    assert [r.line for r in rejects] == [3]


def test_dota_start_time_becomes_iso_week():
    # 2023-09-28 is in ISO week 39 of 2023
    data = b"start_time,radiant_team_id,dire_team_id,radiant_win\n1695859200,1,2,False\n"
    assert parse_match_log(data, "dota")[0].round == 202339


def test_event_roundtrip():
    events = [MatchEvent("S1", 1, "a", "b"), MatchEvent("S1", 2, "b, c", "a")]
    assert parse_match_log(write_match_log(events)) == events


def test_normalize_actor_id():
    assert normalize_actor_id(" 8629005.0 ") == "8629005"
    assert normalize_actor_id("1.05") == "1.05"


def test_ground_truth_generic_row():
    truth = parse_ground_truth(b"actor,score\nalice,2750.0\n")
    assert truth.entries == (("alice", 2750.0),)


def test_ground_truth_duplicate_actor_is_parse_error():
    with pytest.raises(ParseError) as err:
        parse_ground_truth(b"actor,score\na,1\na,2\n")
    assert err.value.line == 3


def test_ground_truth_roundtrip():
    truth = GroundTruthTable((("a", 1.5), ("b", -2.0)))
    assert parse_ground_truth(write_ground_truth(truth)) == truth


def test_chess_and_dota_truth_columns():
    assert parse_ground_truth(b"player,rating\nmagnus,2850\n", "chess").entries == (("magnus", 2850.0),)
    assert parse_ground_truth(b"team_id,rating\n8629005.0,1700\n", "dota").entries == (("8629005", 1700.0),)


def test_survivor_outcome_scores():
    assert survivor_outcome_score("Sole Survivor", 16) == 16
    assert survivor_outcome_score("1st voted out", 16) == 1
    assert survivor_outcome_score("Runner-up", 16) == 15
    assert survivor_outcome_score("2nd runner-up", 16) == 14
    assert survivor_outcome_score("Quit", 16) is None


def test_survivor_truth_from_castaways():
    data = (b"version_season,castaway_id,result\n"
            b"US01,US0001,Sole Survivor\nUS01,US0002,1st voted out\nUS01,US0003,Runner-up\n")
    truth = parse_ground_truth(data, "survivor").as_dict()
    assert truth == {"US01:US0001": 3.0, "US01:US0002": 1.0, "US01:US0003": 2.0}


def test_align_ground_truth():
    truth = GroundTruthTable((("a", 1.0), ("b", 2.0), ("z", 3.0)))
    al = align_ground_truth(truth, ["a", "b", "c"])
    assert al.labeled.actors == ["a", "b"]
    assert al.missing_from_events == ["z"]
    assert al.missing_from_truth == ["c"]


def test_file_like_sources(tmp_path):
    p = tmp_path / "e.csv"
    p.write_bytes(b"competition,round,winner,loser\nS1,1,a,b\n")
    assert parse_match_log(p) == parse_match_log(io.BytesIO(p.read_bytes()))
