//! Keyword sentiment, provider ranking and spam flags over a handful of
//! reviews.

use std::collections::BTreeMap;

use fleetline_core::ids::{CustomerId, ProviderId, ReviewId};
use fleetline_core::reviews::{
    classify_review, detect_spam_providers, rank_providers, sentiment_counts, star_lists, Review,
    SentimentLexicon, SpamPolicy, StopList,
};

fn main() {
    let lexicon = SentimentLexicon::default();
    let stop = StopList::default();
    let texts = [
        ("P1", "C1", "a great driver and a nice clean van", 5),
        ("P1", "C2", "the truck was cold and the service poor", 2),
        ("P2", "C3", "arrived on time", 4),
        ("P2", "C4", "happy with the move", 5),
    ];
    let mut reviews: Vec<Review> = texts
        .iter()
        .enumerate()
        .map(|(i, (p, c, text, stars))| {
            Review::new(ReviewId::new(format!("R{i}")), CustomerId::new(*c), ProviderId::new(*p), None, *text, *stars, i as u64)
                .unwrap()
        })
        .collect();
    for r in &reviews {
        println!("{:?}  {}", classify_review(&r.text, &lexicon, &stop), r.text);
    }
    println!("{:?}", sentiment_counts(&reviews, &lexicon, &stop));

    let providers = [ProviderId::new("P1"), ProviderId::new("P2"), ProviderId::new("P3")];
    let stars: BTreeMap<_, _> = star_lists(&providers, &reviews);
    for r in rank_providers(&stars) {
        println!("{r:?}");
    }

    for i in 0..6 {
        let r = Review::new(ReviewId::new(format!("S{i}")), CustomerId::new("C9"), ProviderId::new("P3"), None, "best best best", 5, i * 60_000)
            .unwrap();
        reviews.push(r);
    }
    println!("{:?}", detect_spam_providers(&reviews, &SpamPolicy::default(), &stop));
}
