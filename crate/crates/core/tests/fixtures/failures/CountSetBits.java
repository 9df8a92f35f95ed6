import java.io.*;
import java.lang.*;
import java.util.*;
import java.math.*;

class CountSetBits {
    
    /*@ 
      @ requires n >= 0;
      @ ensures \result >= 0;
      @ ensures \result == (\sum int i; 1 <= i && i <= n; Integer.bitCount(i));
      @*/
    public static int countSetBits(int n) {
        int count = 0;
        
        //@ maintaining count >= 0;
        //@ maintaining count == (\sum int j; 1 <= j && j <= i-1; Integer.bitCount(j));
        //@ maintaining i >= 1 && i <= n+1;
        for (int i = 1; i <= n; i++) {
            count += Integer.bitCount(i);
        }
        return count;
    }
}
