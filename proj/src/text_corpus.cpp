#include "signbridge/datagen.hpp"

namespace signbridge {

const std::vector<std::string>& builtin_phrases() {
  static const std::vector<std::string> phrases = {
      "HELLO WORLD", "THANK YOU", "TOY BOOK", "MOVIE GOOD", "GOOD MOVIE",
      "ENCYCLOPEDIA IS A BOOK", "EAT APPLE STAY HEALTHY", "APPLE IS HEALTHY",
      "GOOD MORNING", "GOOD NIGHT", "HOW ARE YOU", "I AM FINE", "SEE YOU SOON",
      "WHAT IS YOUR NAME", "MY NAME IS SAM", "NICE TO MEET YOU", "PLEASE HELP ME",
      "I NEED WATER", "WHERE IS THE SCHOOL", "THE SCHOOL IS CLOSED", "OPEN THE DOOR",
      "CLOSE THE WINDOW", "I LOVE MY FAMILY", "MY MOTHER IS HOME", "MY FATHER WORKS",
      "THE BABY IS SLEEPING", "WE PLAY FOOTBALL", "THEY READ BOOKS", "SHE WRITES LETTERS",
      "HE DRINKS MILK", "THE DOG IS HAPPY", "THE CAT IS SMALL", "BIRDS CAN FLY",
      "FISH SWIM FAST", "THE SUN IS HOT", "THE MOON IS BRIGHT", "IT IS RAINING",
      "THE SKY IS BLUE", "GRASS IS GREEN", "I LIKE RED FLOWERS", "BUY FRESH BREAD",
      "COOK RICE TODAY", "LUNCH IS READY", "DINNER AT SEVEN", "BREAKFAST WAS GOOD",
      "CALL THE DOCTOR", "GO TO HOSPITAL", "TAKE YOUR MEDICINE", "I FEEL SICK",
      "I AM HUNGRY", "I AM TIRED", "LET US GO", "COME HERE NOW", "WAIT FOR ME",
      "SEE YOU TOMORROW", "HAPPY BIRTHDAY", "HAPPY NEW YEAR", "WELCOME HOME",
      "SORRY I AM LATE", "EXCUSE ME", "NO PROBLEM", "YES PLEASE", "NO THANK YOU",
      "GOOD LUCK", "TAKE CARE", "DRIVE SAFELY", "THE CAR IS FAST", "CATCH THE BUS",
      "THE TRAIN IS LATE", "BOOK A TICKET", "THE SHOP IS OPEN", "MONEY IS TIGHT",
      "PAY THE BILL", "CLEAN THE ROOM", "WASH YOUR HANDS", "BRUSH YOUR TEETH",
      "WEAR A COAT", "IT IS COLD", "IT IS WARM", "THE WATER IS DEEP",
      "READ THE NEWS", "WATCH A MOVIE", "LISTEN TO MUSIC", "SING A SONG",
      "DANCE WITH ME", "PAINT THE WALL", "DRAW A PICTURE", "WRITE YOUR NAME",
      "LEARN SIGN LANGUAGE", "TEACH THE CHILDREN", "STUDENTS ARE LEARNING",
      "THE TEACHER IS KIND", "ASK A QUESTION", "ANSWER THE PHONE", "SEND A MESSAGE",
      "CHECK YOUR EMAIL", "THE COMPUTER IS SLOW", "CHARGE THE PHONE", "TURN OFF THE LIGHT",
      "TURN ON THE FAN", "THE GARDEN IS BEAUTIFUL", "PLANT A TREE", "WATER THE PLANTS",
      "FRUIT IS SWEET", "LEMON IS SOUR", "COFFEE IS BITTER", "TEA WITH SUGAR",
      "ORANGE JUICE PLEASE", "BANANA AND MANGO", "EGGS FOR BREAKFAST", "CHICKEN SOUP",
      "THE CITY IS BUSY", "THE VILLAGE IS QUIET", "RIVER FLOWS SLOWLY", "CLIMB THE MOUNTAIN",
      "WALK IN THE PARK", "RUN VERY FAST", "JUMP HIGH", "SIT DOWN PLEASE", "STAND UP",
      "FRIENDS FOREVER", "MY BEST FRIEND", "BROTHER AND SISTER", "GRANDMOTHER TELLS STORIES",
      "THE OLD MAN SMILES", "THE YOUNG GIRL LAUGHS", "THE BOY IS TALL", "WOMEN AND MEN",
      "OFFICE STARTS EARLY", "WORK IS DONE", "MEETING AT NOON", "FINISH THE PROJECT",
      "THE GAME IS OVER", "WE WON THE MATCH", "THEY LOST AGAIN", "TRY ONCE MORE",
      "NEVER GIVE UP", "ALWAYS BE HONEST", "SPEAK THE TRUTH", "KEEP THE PEACE",
      "SAVE THE EARTH", "PROTECT ANIMALS", "THE FOREST IS GREEN", "SNOW IS WHITE",
      "WINTER IS COMING", "SUMMER HOLIDAY", "SPRING FLOWERS BLOOM", "AUTUMN LEAVES FALL",
      "BANK IS CLOSED", "BOOK OF TOYS", "APPLE STAY THERE", "THE LIBRARY HAS BOOKS",
  };
  return phrases;
}

const std::vector<std::string>& builtin_words() {
  static const std::vector<std::string> words = {
      "A", "ABOUT", "AFTER", "AGAIN", "ALL", "ALSO", "ALWAYS", "AM", "AN", "AND",
      "ANIMALS", "ANSWER", "APPLE", "ARE", "ASK", "AT", "AUTUMN", "BABY", "BAD", "BAG",
      "BALL", "BANANA", "BANK", "BE", "BEAUTIFUL", "BED", "BEST", "BIG", "BILL", "BIRDS",
      "BIRTHDAY", "BITTER", "BLOOM", "BLUE", "BOOK", "BOOKS", "BOX", "BOY", "BREAD", "BREAKFAST",
      "BRIGHT", "BROTHER", "BRUSH", "BUS", "BUSY", "BUY", "CALL", "CAN", "CAR", "CARE",
      "CAT", "CATCH", "CHARGE", "CHECK", "CHICKEN", "CHILDREN", "CITY", "CLEAN", "CLIMB", "CLOSE",
      "CLOSED", "COAT", "COFFEE", "COLD", "COME", "COMING", "COMPUTER", "COOK", "DANCE", "DAY",
      "DEEP", "DINNER", "DO", "DOCTOR", "DOG", "DONE", "DOOR", "DOWN", "DRAW", "DRINKS",
      "DRIVE", "EARLY", "EARTH", "EAT", "EGGS", "EMAIL", "ENCYCLOPEDIA", "EXCUSE", "FALL", "FAMILY",
      "FAN", "FAST", "FATHER", "FEEL", "FINE", "FINISH", "FISH", "FLOWERS", "FLOWS", "FLY",
      "FOOD", "FOOTBALL", "FOR", "FOREST", "FOREVER", "FRESH", "FRIEND", "FRIENDS", "FRUIT", "GAME",
      "GARDEN", "GIRL", "GIVE", "GO", "GOOD", "GRANDMOTHER", "GRASS", "GREEN", "HANDS", "HAPPY",
      "HAS", "HE", "HEALTHY", "HELLO", "HELP", "HERE", "HIGH", "HOLIDAY", "HOME", "HONEST",
      "HOSPITAL", "HOT", "HOW", "HUNGRY", "I", "IN", "IS", "IT", "JUICE", "JUMP",
      "KEEP", "KIND", "LANGUAGE", "LATE", "LAUGHS", "LEARN", "LEARNING", "LEAVES", "LEMON", "LET",
      "LETTERS", "LIBRARY", "LIGHT", "LIKE", "LISTEN", "LOST", "LOVE", "LUCK", "LUNCH", "MAN",
      "MANGO", "MATCH", "ME", "MEDICINE", "MEET", "MEETING", "MEN", "MESSAGE", "MILK", "MONEY",
      "MOON", "MORE", "MORNING", "MOTHER", "MOUNTAIN", "MOVIE", "MUSIC", "MY", "NAME", "NEED",
      "NEVER", "NEW", "NEWS", "NICE", "NIGHT", "NO", "NOON", "NOW", "OF", "OFF",
      "OFFICE", "OLD", "ON", "ONCE", "OPEN", "ORANGE", "OVER", "PAINT", "PARK", "PAY",
      "PEACE", "PHONE", "PICTURE", "PLANT", "PLANTS", "PLAY", "PLEASE", "PROBLEM", "PROJECT", "PROTECT",
      "QUESTION", "QUIET", "RAINING", "READ", "READY", "RED", "RICE", "RIVER", "ROOM", "RUN",
      "SAFELY", "SAM", "SAVE", "SCHOOL", "SEE", "SEND", "SEVEN", "SHE", "SHOP", "SICK",
      "SIGN", "SING", "SISTER", "SIT", "SKY", "SLEEPING", "SLOW", "SLOWLY", "SMALL", "SMILES",
      "SNOW", "SONG", "SOON", "SORRY", "SOUP", "SOUR", "SPEAK", "SPRING", "STAND", "STARTS",
      "STAY", "STORIES", "STUDENTS", "SUGAR", "SUMMER", "SUN", "SWEET", "SWIM", "TAKE", "TALL",
      "TEA", "TEACH", "TEACHER", "TEETH", "TELLS", "THANK", "THE", "THERE", "THEY", "TICKET",
      "TIGHT", "TIRED", "TO", "TODAY", "TOMORROW", "TOY", "TOYS", "TRAIN", "TREE", "TRUTH",
      "TRY", "TURN", "UP", "VERY", "VILLAGE", "WAIT", "WALK", "WALL", "WARM", "WAS",
      "WASH", "WATCH", "WATER", "WE", "WEAR", "WELCOME", "WHAT", "WHERE", "WHITE", "WINDOW",
      "WINTER", "WITH", "WOMEN", "WON", "WORK", "WORKS", "WORLD", "WRITE", "WRITES", "YEAR",
      "YES", "YOU", "YOUNG", "YOUR",
  };
  return words;
}

}  // namespace signbridge
