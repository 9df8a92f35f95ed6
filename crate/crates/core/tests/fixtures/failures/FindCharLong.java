import java.io.*;
import java.lang.*;
import java.util.*;
import java.math.*;

class FindCharLong {
    
    /**
     * Finds all words in the given text that are at least 4 characters long.
     * 
     * @param text the input string to search for words
     * @return an array of words with at least 4 characters
     * @throws NullPointerException if text is null
     * 
     * @ensures \result != null && (\forall int i; 0 <= i && i < \result.length; \result[i].length() >= 4) &&
     *          (\forall String word; (\exists int i; 0 <= i && i < \result.length; \result[i].equals(word)) <==> 
     *          (word.length() >= 4 && (\exists int j; 0 <= j && j < words.length; words[j].equals(word))))
     */
    public static String[] findCharLong(String text) {
        //@ requires text != null;
        //@ ensures \result != null;
        //@ ensures (\forall int i; 0 <= i && i < \result.length; \result[i].length() >= 4);

        String[] words = text.split("\\s+");
        int count = 0;

        // Count words with 4 or more characters
        /*@ loop_invariant 0 <= count && count <= words.length;
          @ loop_invariant (\forall int k; 0 <= k && k < count; words[k].length() >= 4);
          @ decreases words.length - count;
          @*/
        for (String word : words) {
            if (word.length() >= 4) {
                count++;
            }
        }

        String[] result = new String[count];
        int index = 0;

        // Collect words with 4 or more characters
        /*@ loop_invariant 0 <= index && index <= count;
          @ loop_invariant (\forall int k; 0 <= k && k < index; result[k].length() >= 4);
          @ loop_invariant (\forall int k; 0 <= k && k < index; 
          @     (\exists int j; 0 <= j && j < words.length; result[k].equals(words[j])));
          @ decreases words.length - index;
          @*/
        for (String word : words) {
            if (word.length() >= 4) {
                result[index++] = word;
            }
        }
        return result;
    }
}
